//! Annotation service: hands out passages with a model pre-fill, records
//! corrected annotations with server-side timing and exports the finished
//! set as fine-tuning pairs.
//!
//! [`AnnotationService`] holds the queue and can be used directly;
//! [`http::router`] exposes it over REST:
//!
//! | method | path | |
//! |---|---|---|
//! | `GET` | `/tasks/next?annotator=ID` | claim the oldest pending task (204 when none) |
//! | `POST` | `/tasks/{id}/submit` | submit corrected records |
//! | `GET` | `/export?schema=S` | finished pairs, optionally for one schema |
//! | `GET` | `/stats` | queue counts and timing report |
//! | `POST` | `/tasks` | ingest a list of prompts |

pub mod http;
mod journal;
pub mod model;
mod service;

pub use journal::snapshot_path;
pub use model::{AnnotationResult, AnnotationTask, NewTask, Submission, TaskId, TaskStatus, Timing};
pub use service::{
    AnnotationService, Clock, GroupTiming, ManualClock, QueueStats, Suggester, Summary, SystemClock, TimingReport,
    TimingStats, UNASSISTED,
};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("no pending task")]
    QueueEmpty,
    #[error("no task {0}")]
    NotFound(TaskId),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Invalid(String),
    #[error("no finished annotations yet")]
    EmptyData,
    #[error("journal: {0}")]
    Journal(String),
}
