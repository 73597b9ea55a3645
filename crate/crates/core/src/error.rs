use thiserror::Error;

/// Errors raised by the library.
///
/// Unparsable completions are not errors; they are reported through
/// [`ParseOutcome`](crate::codec::ParseOutcome).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("sample {index}: completion does not decode under {schema}: {reason}")]
    UnparsableSample { index: usize, schema: crate::records::SchemaId, reason: String },

    #[error(transparent)]
    Backend(#[from] crate::llm::BackendError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
