use serde::{Deserialize, Serialize};

use crate::records::PromptCompletionPair;

/// Appended to every prompt.
pub const PROMPT_SEPARATOR: &str = "\n\n\n###\n\n\n";

/// Appended to every completion; the model stops generating here.
pub const COMPLETION_STOP: &str = "\n\n\nEND\n\n\n";

/// A sample with the fine-tuning separators applied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WrappedSample {
    pub prompt_wire: String,
    pub completion_wire: String,
}

pub fn wrap(pair: &PromptCompletionPair) -> WrappedSample {
    WrappedSample {
        prompt_wire: wrap_prompt(&pair.prompt),
        completion_wire: format!("{}{COMPLETION_STOP}", pair.completion),
    }
}

/// Appends the prompt separator.
pub fn wrap_prompt(prompt: &str) -> String {
    format!("{prompt}{PROMPT_SEPARATOR}")
}

/// A completion cut at its stop sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Unwrapped {
    pub text: String,
    /// The stop sequence never appeared.
    pub truncated: bool,
}

/// Strips the stop sequence and anything after it, plus at most one leading
/// space.
pub fn unwrap_completion(raw: &str) -> Unwrapped {
    let (body, truncated) = match raw.find(COMPLETION_STOP) {
        Some(i) => (&raw[..i], false),
        None => (raw, true),
    };
    let body = body.strip_prefix(' ').unwrap_or(body);
    Unwrapped { text: body.to_owned(), truncated }
}
