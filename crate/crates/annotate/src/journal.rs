//! Append-only event journal with periodic snapshots.
//!
//! Every state change is one JSON line in the journal. A snapshot holds the
//! whole state and the sequence number of the last event it includes; after
//! writing it the journal is truncated. Loading reads the snapshot, then
//! replays journal events newer than it, so a crash between the two steps
//! loses nothing.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::model::{StoredResult, StoredTask, TaskId};
use crate::ServiceError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Added { task: StoredTask },
    Claimed { task_id: TaskId, annotator: String, at: f64, model_tag: Option<String> },
    Suggested { task_id: TaskId, completion: String },
    Submitted { task_id: TaskId, result: StoredResult },
}

#[derive(Debug, Serialize, Deserialize)]
struct Line {
    seq: u64,
    #[serde(flatten)]
    event: Event,
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct Snapshot {
    pub seq: u64,
    pub tasks: Vec<StoredTask>,
}

pub struct Journal {
    path: PathBuf,
    file: File,
    seq: u64,
    since_snapshot: usize,
    snapshot_every: usize,
}

pub fn snapshot_path(journal: &Path) -> PathBuf {
    let mut name = journal.file_name().unwrap_or_default().to_os_string();
    name.push(".snapshot");
    journal.with_file_name(name)
}

fn journal_err(path: &Path, e: impl std::fmt::Display) -> ServiceError {
    ServiceError::Journal(format!("{}: {e}", path.display()))
}

impl Journal {
    /// Opens (or creates) the journal and returns the events to apply on top
    /// of the returned snapshot.
    pub fn open(path: &Path, snapshot_every: usize) -> Result<(Journal, Snapshot, Vec<Event>), ServiceError> {
        let snap_path = snapshot_path(path);
        let snapshot: Snapshot = match fs::read_to_string(&snap_path) {
            Ok(s) => serde_json::from_str(&s).map_err(|e| journal_err(&snap_path, e))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Snapshot::default(),
            Err(e) => return Err(journal_err(&snap_path, e)),
        };
        let mut seq = snapshot.seq;
        let mut events = Vec::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path).map_err(|e| journal_err(path, e))?);
            for (i, line) in reader.lines().enumerate() {
                let line = line.map_err(|e| journal_err(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let parsed: Line = match serde_json::from_str(&line) {
                    Ok(l) => l,
                    // a torn final write from a crash
                    Err(e) if e.is_eof() => {
                        log::warn!("{}: ignoring incomplete line {}", path.display(), i + 1);
                        continue;
                    }
                    Err(e) => return Err(journal_err(path, format!("line {}: {e}", i + 1))),
                };
                if parsed.seq > seq {
                    seq = parsed.seq;
                    events.push(parsed.event);
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(|e| journal_err(path, e))?;
        let journal = Journal { path: path.to_owned(), file, seq, since_snapshot: events.len(), snapshot_every };
        Ok((journal, snapshot, events))
    }

    /// Appends one event. `durable` forces it to disk before returning.
    pub fn append(&mut self, event: &Event, durable: bool) -> Result<(), ServiceError> {
        let line = Line { seq: self.seq + 1, event: event.clone() };
        let mut text = serde_json::to_string(&line).map_err(|e| journal_err(&self.path, e))?;
        text.push('\n');
        self.file.write_all(text.as_bytes()).map_err(|e| journal_err(&self.path, e))?;
        if durable {
            self.file.sync_data().map_err(|e| journal_err(&self.path, e))?;
        }
        self.seq += 1;
        self.since_snapshot += 1;
        Ok(())
    }

    pub fn snapshot_due(&self) -> bool {
        self.snapshot_every > 0 && self.since_snapshot >= self.snapshot_every
    }

    /// Writes `tasks` as the snapshot at the current sequence number and
    /// empties the journal.
    pub fn snapshot(&mut self, tasks: &[StoredTask]) -> Result<(), ServiceError> {
        let snap = Snapshot { seq: self.seq, tasks: tasks.to_vec() };
        let snap_path = snapshot_path(&self.path);
        let tmp = snap_path.with_extension("snapshot.tmp");
        let text = serde_json::to_string(&snap).map_err(|e| journal_err(&tmp, e))?;
        {
            let mut f = File::create(&tmp).map_err(|e| journal_err(&tmp, e))?;
            f.write_all(text.as_bytes()).map_err(|e| journal_err(&tmp, e))?;
            f.sync_all().map_err(|e| journal_err(&tmp, e))?;
        }
        fs::rename(&tmp, &snap_path).map_err(|e| journal_err(&snap_path, e))?;
        self.file.set_len(0).map_err(|e| journal_err(&self.path, e))?;
        self.since_snapshot = 0;
        Ok(())
    }
}
