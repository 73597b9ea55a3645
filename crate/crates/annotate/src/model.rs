use matextract::codec::decode;
use matextract::records::{Records, SchemaId};
use serde::{Deserialize, Serialize};

pub type TaskId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Pending,
    InProgress,
    Done,
}

/// A prompt to ingest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewTask {
    pub prompt: String,
    pub schema: SchemaId,
    /// The annotator only confirms or rejects the pre-fill.
    #[serde(default)]
    pub verify_only: bool,
}

/// Server-measured timing of one annotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub seconds_total: f64,
    pub seconds_per_entry: f64,
    pub seconds_per_token: f64,
    /// Active time reported by the client; kept for reference only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub client_seconds: Option<f64>,
}

/// Smallest duration a submission is credited with, so the per-unit figures
/// stay finite and positive.
pub const MIN_SECONDS: f64 = 1e-3;

impl Timing {
    /// Derives the per-entry and per-token figures; `entries` is floored at
    /// one and `tokens` counts whitespace-separated prompt tokens.
    pub fn derive(seconds_total: f64, entries: usize, prompt: &str, client_seconds: Option<f64>) -> Timing {
        let seconds_total = seconds_total.max(MIN_SECONDS);
        let tokens = prompt.split_whitespace().count().max(1);
        Timing {
            seconds_total,
            seconds_per_entry: seconds_total / entries.max(1) as f64,
            seconds_per_token: seconds_total / tokens as f64,
            client_seconds,
        }
    }
}

/// The stored state of one task. Records are kept as canonical completion
/// strings so the journal needs no schema-dependent parsing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredTask {
    pub task_id: TaskId,
    pub prompt: String,
    pub schema: SchemaId,
    pub verify_only: bool,
    pub status: TaskStatus,
    #[serde(default)]
    pub annotator: Option<String>,
    #[serde(default)]
    pub claimed_at: Option<f64>,
    #[serde(default)]
    pub model_tag: Option<String>,
    #[serde(default)]
    pub suggestion: Option<String>,
    #[serde(default)]
    pub result: Option<StoredResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredResult {
    pub completion: String,
    pub submitted_at: f64,
    pub timing: Timing,
}

/// A task as handed to an annotator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnotationTask {
    pub task_id: TaskId,
    pub prompt: String,
    pub schema: SchemaId,
    pub status: TaskStatus,
    pub verify_only: bool,
    /// Decoded pre-fill; absent when no model is configured or its output
    /// did not decode.
    pub suggestion: Option<Records>,
    pub model_tag: Option<String>,
}

impl StoredTask {
    pub fn view(&self) -> AnnotationTask {
        AnnotationTask {
            task_id: self.task_id,
            prompt: self.prompt.clone(),
            schema: self.schema,
            status: self.status,
            verify_only: self.verify_only,
            suggestion: self.suggestion.as_deref().and_then(|s| decode(self.schema, s).into_record()),
            model_tag: self.model_tag.clone(),
        }
    }
}

/// What an annotator sends back: the corrected records, either as a JSON
/// structure or as a completion string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submission {
    pub annotator: String,
    #[serde(default)]
    pub records: Option<serde_json::Value>,
    #[serde(default)]
    pub completion: Option<String>,
    #[serde(default)]
    pub client_seconds: Option<f64>,
}

/// A finished annotation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnotationResult {
    pub task_id: TaskId,
    pub annotator: String,
    pub records: Records,
    pub completion: String,
    pub timing: Timing,
    pub model_tag: Option<String>,
    pub verify_only: bool,
}
