//! Completion backends, the inference pipeline and fine-tuning plans.

mod backend;

pub use backend::{prompt_sha256, BackendError, CompletionBackend, LiveBackend, LiveConfig, ReplayStore};

use serde::{Deserialize, Serialize};

use crate::codec::{decode_wire, wrap_prompt, ParseOutcome, COMPLETION_STOP};
use crate::error::{Error, Result};
use crate::records::{Records, SchemaId};

/// Sampling settings sent with each completion request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceParams {
    pub max_tokens: u32,
    pub temperature: f64,
    pub stop: String,
    /// Prompt plus completion budget of the model, in tokens. Only used to
    /// warn about prompts that will likely be cut off.
    #[serde(default = "default_context_limit")]
    pub context_limit: usize,
}

fn default_context_limit() -> usize {
    2048
}

impl InferenceParams {
    /// Greedy decoding with 256 output tokens for the doping schemas and
    /// 512 for the others.
    pub fn for_schema(schema: SchemaId) -> Self {
        let max_tokens = if schema.is_doping() { 256 } else { 512 };
        InferenceParams {
            max_tokens,
            temperature: 0.0,
            stop: COMPLETION_STOP.into(),
            context_limit: default_context_limit(),
        }
    }
}

impl Default for InferenceParams {
    fn default() -> Self {
        InferenceParams::for_schema(SchemaId::GeneralJson)
    }
}

/// Fine-tuning hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinetuneConfig {
    pub epochs: u32,
    pub batch_size: u32,
    pub lr_multiplier: f64,
    pub prompt_loss_weight: f64,
}

pub fn default_finetune_config(schema: SchemaId) -> FinetuneConfig {
    FinetuneConfig {
        epochs: if schema.is_doping() { 7 } else { 4 },
        batch_size: 1,
        lr_multiplier: 0.1,
        prompt_loss_weight: 0.01,
    }
}

/// The job description handed to a provider's fine-tuning tool alongside
/// the training file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinetuneJob {
    pub training_file: String,
    pub base_model: String,
    pub schema: SchemaId,
    pub hyperparameters: FinetuneConfig,
    pub inference: InferenceParams,
}

impl FinetuneJob {
    pub fn new(schema: SchemaId, training_file: impl Into<String>, base_model: impl Into<String>) -> Self {
        FinetuneJob {
            training_file: training_file.into(),
            base_model: base_model.into(),
            schema,
            hyperparameters: default_finetune_config(schema),
            inference: InferenceParams::for_schema(schema),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("job serialization cannot fail") + "\n"
    }
}

/// One model of a learning-curve experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveJob {
    pub n: usize,
    pub epochs: u32,
    pub seed: u64,
}

/// Epochs for an intermediate model trained on `n` samples: 2 below 64,
/// 4 from 64 through 128, 7 above.
///
/// The published schedule names 256 as the only size above 128; every larger
/// size, including those between 129 and 255, gets the 7-epoch rule.
pub fn curve_epochs(n: usize) -> Result<u32> {
    match n {
        0 => Err(Error::InvalidArgument("training set size must be positive".into())),
        1..=63 => Ok(2),
        64..=128 => Ok(4),
        _ => Ok(7),
    }
}

/// One job per size, in input order. Job `i` uses seed `base_seed + i` for
/// drawing its training subset.
pub fn learning_curve_plan(sizes: &[usize], base_seed: u64) -> Result<Vec<CurveJob>> {
    sizes
        .iter()
        .enumerate()
        .map(|(i, &n)| Ok(CurveJob { n, epochs: curve_epochs(n)?, seed: base_seed.wrapping_add(i as u64) }))
        .collect()
}

/// The result of running one passage through a model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extraction {
    /// Model output as received.
    pub raw: String,
    /// Output cut at the stop sequence.
    pub text: String,
    /// The stop sequence never appeared.
    pub truncated: bool,
    #[serde(flatten)]
    pub outcome: ParseOutcome<Records>,
}

/// Whitespace token count, a cheap stand-in for the model's tokenizer.
pub fn approximate_tokens(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Wraps `text` as a prompt, asks `backend` for a completion and decodes it.
///
/// Backend failures are errors; an undecodable or cut-off completion is
/// reported through the outcome.
pub fn extract_records(
    text: &str,
    schema: SchemaId,
    backend: &dyn CompletionBackend,
    params: &InferenceParams,
) -> Result<Extraction> {
    if text.trim().is_empty() {
        return Err(Error::InvalidArgument("prompt is empty".into()));
    }
    let prompt = wrap_prompt(text);
    let budget = approximate_tokens(&prompt) + params.max_tokens as usize;
    if budget > params.context_limit {
        log::warn!(
            "prompt of ~{} tokens plus {} completion tokens exceeds the {}-token limit; the completion may be cut off",
            approximate_tokens(&prompt),
            params.max_tokens,
            params.context_limit
        );
    }
    let raw = backend.complete(&prompt, params)?;
    let (unwrapped, outcome) = decode_wire(schema, &raw);
    Ok(Extraction { raw, text: unwrapped.text, truncated: unwrapped.truncated, outcome })
}
