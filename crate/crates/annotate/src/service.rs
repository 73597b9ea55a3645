use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, Mutex, MutexGuard, RwLock};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use matextract::codec::{decode, encode};
use matextract::llm::{extract_records, CompletionBackend, InferenceParams};
use matextract::records::{PromptCompletionPair, Records, SchemaId, Split};
use serde::Serialize;

use crate::journal::{Event, Journal};
use crate::model::{
    AnnotationResult, AnnotationTask, NewTask, StoredResult, StoredTask, Submission, TaskId, TaskStatus, Timing,
};
use crate::ServiceError;

/// Source of server timestamps, in seconds.
pub trait Clock: Send + Sync {
    fn now(&self) -> f64;
}

/// Wall-clock start plus monotonic elapsed time, so durations never go
/// negative.
pub struct SystemClock {
    base: f64,
    start: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        let base = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64());
        SystemClock { base, start: Instant::now() }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> f64 {
        self.base + self.start.elapsed().as_secs_f64()
    }
}

/// A clock that only moves when told to.
#[derive(Default)]
pub struct ManualClock(Mutex<f64>);

impl ManualClock {
    pub fn new(start: f64) -> Self {
        ManualClock(Mutex::new(start))
    }

    pub fn advance(&self, seconds: f64) {
        *self.0.lock().unwrap() += seconds;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> f64 {
        *self.0.lock().unwrap()
    }
}

/// The model that pre-fills claimed tasks, with the tag reports group by.
#[derive(Clone)]
pub struct Suggester {
    pub backend: Arc<dyn CompletionBackend>,
    pub tag: String,
}

/// Tag used for tasks claimed while no model was configured.
pub const UNASSISTED: &str = "unassisted";

struct Inner {
    tasks: BTreeMap<TaskId, StoredTask>,
    journal: Option<Journal>,
}

impl Inner {
    fn record(&mut self, event: Event, durable: bool) -> Result<(), ServiceError> {
        apply(&mut self.tasks, event.clone());
        if let Some(j) = self.journal.as_mut() {
            j.append(&event, durable)?;
            if j.snapshot_due() {
                let tasks: Vec<StoredTask> = self.tasks.values().cloned().collect();
                j.snapshot(&tasks)?;
            }
        }
        Ok(())
    }
}

fn apply(tasks: &mut BTreeMap<TaskId, StoredTask>, event: Event) {
    match event {
        Event::Added { task } => {
            tasks.insert(task.task_id, task);
        }
        Event::Claimed { task_id, annotator, at, model_tag } => {
            if let Some(t) = tasks.get_mut(&task_id) {
                t.status = TaskStatus::InProgress;
                t.annotator = Some(annotator);
                t.claimed_at = Some(at);
                t.model_tag = model_tag;
            }
        }
        Event::Suggested { task_id, completion } => {
            if let Some(t) = tasks.get_mut(&task_id) {
                t.suggestion = Some(completion);
            }
        }
        Event::Submitted { task_id, result } => {
            if let Some(t) = tasks.get_mut(&task_id) {
                t.status = TaskStatus::Done;
                t.result = Some(result);
            }
        }
    }
}

/// Task counts by status.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct QueueStats {
    pub pending: usize,
    pub in_progress: usize,
    pub done: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
}

impl Summary {
    fn of(mut xs: Vec<f64>) -> Summary {
        xs.sort_by(f64::total_cmp);
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let median = if n % 2 == 1 { xs[n / 2] } else { (xs[n / 2 - 1] + xs[n / 2]) / 2.0 };
        Summary { mean, median }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingStats {
    pub n: usize,
    pub seconds_total: Summary,
    pub seconds_per_entry: Summary,
    pub seconds_per_token: Summary,
}

impl TimingStats {
    fn of(timings: &[Timing]) -> Option<TimingStats> {
        if timings.is_empty() {
            return None;
        }
        let col = |f: fn(&Timing) -> f64| Summary::of(timings.iter().map(f).collect());
        Some(TimingStats {
            n: timings.len(),
            seconds_total: col(|t| t.seconds_total),
            seconds_per_entry: col(|t| t.seconds_per_entry),
            seconds_per_token: col(|t| t.seconds_per_token),
        })
    }
}

/// Timing of one pre-fill model; correction and verify-only tasks are
/// reported apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupTiming {
    pub correction: Option<TimingStats>,
    pub verification: Option<TimingStats>,
}

pub type TimingReport = BTreeMap<String, GroupTiming>;

/// Annotation queue shared by concurrent clients.
///
/// Claiming is serialized; pre-fill suggestions are computed after the claim
/// without holding the lock, using whichever model is configured at that
/// moment.
pub struct AnnotationService {
    inner: Mutex<Inner>,
    suggester: RwLock<Option<Suggester>>,
    clock: Arc<dyn Clock>,
}

impl AnnotationService {
    /// An in-memory service.
    pub fn new(clock: Arc<dyn Clock>) -> Self {
        AnnotationService {
            inner: Mutex::new(Inner { tasks: BTreeMap::new(), journal: None }),
            suggester: RwLock::new(None),
            clock,
        }
    }

    /// A service persisted to `journal`, restoring any earlier state. A
    /// snapshot is written every `snapshot_every` events (0 disables them).
    pub fn open(journal: &Path, snapshot_every: usize, clock: Arc<dyn Clock>) -> Result<Self, ServiceError> {
        let (journal, snapshot, events) = Journal::open(journal, snapshot_every)?;
        let mut tasks: BTreeMap<TaskId, StoredTask> = snapshot.tasks.into_iter().map(|t| (t.task_id, t)).collect();
        for e in events {
            apply(&mut tasks, e);
        }
        Ok(AnnotationService {
            inner: Mutex::new(Inner { tasks, journal: Some(journal) }),
            suggester: RwLock::new(None),
            clock,
        })
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Replaces the pre-fill model; `None` turns pre-fill off.
    pub fn set_suggester(&self, suggester: Option<Suggester>) {
        *self.suggester.write().unwrap_or_else(|e| e.into_inner()) = suggester;
    }

    pub fn add_tasks(&self, new: Vec<NewTask>) -> Result<Vec<TaskId>, ServiceError> {
        for (i, t) in new.iter().enumerate() {
            if t.prompt.trim().is_empty() {
                return Err(ServiceError::Invalid(format!("task {i}: prompt is empty")));
            }
        }
        let mut inner = self.lock();
        let first = inner.tasks.keys().next_back().map_or(1, |k| k + 1);
        let mut ids = Vec::with_capacity(new.len());
        for (task_id, t) in (first..).zip(new) {
            let task = StoredTask {
                task_id,
                prompt: t.prompt,
                schema: t.schema,
                verify_only: t.verify_only,
                status: TaskStatus::Pending,
                annotator: None,
                claimed_at: None,
                model_tag: None,
                suggestion: None,
                result: None,
            };
            inner.record(Event::Added { task }, false)?;
            ids.push(task_id);
        }
        Ok(ids)
    }

    /// Claims the oldest pending task for `annotator` and attaches a
    /// pre-fill suggestion when the configured model's output decodes.
    pub fn next_task(&self, annotator: &str) -> Result<AnnotationTask, ServiceError> {
        if annotator.trim().is_empty() {
            return Err(ServiceError::Invalid("annotator id is empty".into()));
        }
        let suggester = self.suggester.read().unwrap_or_else(|e| e.into_inner()).clone();
        let tag = Some(suggester.as_ref().map_or(UNASSISTED.to_owned(), |s| s.tag.clone()));
        let (task_id, prompt, schema) = {
            let mut inner = self.lock();
            let task =
                inner.tasks.values().find(|t| t.status == TaskStatus::Pending).ok_or(ServiceError::QueueEmpty)?;
            let claimed = (task.task_id, task.prompt.clone(), task.schema);
            let event = Event::Claimed {
                task_id: claimed.0,
                annotator: annotator.to_owned(),
                at: self.clock.now(),
                model_tag: tag,
            };
            inner.record(event, false)?;
            claimed
        };

        if let Some(s) = suggester {
            match extract_records(&prompt, schema, s.backend.as_ref(), &InferenceParams::for_schema(schema)) {
                Ok(x) => match x.outcome.into_result() {
                    Ok(records) => {
                        if let Ok(completion) = encode(schema, &records) {
                            self.lock().record(Event::Suggested { task_id, completion }, false)?;
                        }
                    }
                    Err(d) => log::info!("task {task_id}: suggestion from {} does not decode: {d}", s.tag),
                },
                Err(e) => log::warn!("task {task_id}: suggestion from {} failed: {e}", s.tag),
            }
        }
        Ok(self.lock().tasks[&task_id].view())
    }

    /// Stores the corrected records of a claimed task.
    pub fn submit(&self, task_id: TaskId, submission: Submission) -> Result<AnnotationResult, ServiceError> {
        let mut inner = self.lock();
        let task = inner.tasks.get(&task_id).ok_or(ServiceError::NotFound(task_id))?;
        match task.status {
            TaskStatus::Done => return Err(ServiceError::Conflict(format!("task {task_id} was already submitted"))),
            TaskStatus::Pending => return Err(ServiceError::Conflict(format!("task {task_id} is not claimed"))),
            TaskStatus::InProgress if task.annotator.as_deref() != Some(submission.annotator.as_str()) => {
                return Err(ServiceError::Conflict(format!("task {task_id} is claimed by another annotator")))
            }
            TaskStatus::InProgress => {}
        }

        let records = normalize(task.schema, &submission)?;
        let completion = encode(task.schema, &records).map_err(|e| ServiceError::Invalid(e.to_string()))?;
        let now = self.clock.now();
        let elapsed = now - task.claimed_at.unwrap_or(now);
        let timing = Timing::derive(elapsed, records.entry_count(), &task.prompt, submission.client_seconds);
        let result = StoredResult { completion: completion.clone(), submitted_at: now, timing };
        let out = AnnotationResult {
            task_id,
            annotator: submission.annotator,
            records,
            completion,
            timing,
            model_tag: task.model_tag.clone(),
            verify_only: task.verify_only,
        };
        inner.record(Event::Submitted { task_id, result }, true)?;
        Ok(out)
    }

    /// Finished tasks as training pairs, ordered by submission time.
    pub fn export(&self, schema: Option<SchemaId>) -> Vec<PromptCompletionPair> {
        let inner = self.lock();
        let mut done: Vec<(&StoredTask, &StoredResult)> = inner
            .tasks
            .values()
            .filter(|t| schema.map_or(true, |s| t.schema == s))
            .filter_map(|t| t.result.as_ref().map(|r| (t, r)))
            .collect();
        done.sort_by(|a, b| a.1.submitted_at.total_cmp(&b.1.submitted_at).then(a.0.task_id.cmp(&b.0.task_id)));
        done.into_iter()
            .map(|(t, r)| PromptCompletionPair {
                prompt: t.prompt.clone(),
                completion: r.completion.clone(),
                schema: t.schema,
                split: Split::Train,
            })
            .collect()
    }

    pub fn queue_stats(&self) -> QueueStats {
        let inner = self.lock();
        let mut s = QueueStats::default();
        for t in inner.tasks.values() {
            match t.status {
                TaskStatus::Pending => s.pending += 1,
                TaskStatus::InProgress => s.in_progress += 1,
                TaskStatus::Done => s.done += 1,
            }
        }
        s
    }

    /// Mean and median timings per pre-fill model tag.
    pub fn timing_report(&self) -> Result<TimingReport, ServiceError> {
        let inner = self.lock();
        let mut groups: BTreeMap<String, (Vec<Timing>, Vec<Timing>)> = BTreeMap::new();
        for t in inner.tasks.values() {
            if let Some(r) = &t.result {
                let tag = t.model_tag.clone().unwrap_or_else(|| UNASSISTED.to_owned());
                let g = groups.entry(tag).or_default();
                let bucket = if t.verify_only { &mut g.1 } else { &mut g.0 };
                bucket.push(r.timing);
            }
        }
        if groups.is_empty() {
            return Err(ServiceError::EmptyData);
        }
        Ok(groups
            .into_iter()
            .map(|(tag, (c, v))| {
                (tag, GroupTiming { correction: TimingStats::of(&c), verification: TimingStats::of(&v) })
            })
            .collect())
    }

    /// Forces a snapshot of a journaled service.
    pub fn snapshot(&self) -> Result<(), ServiceError> {
        let mut inner = self.lock();
        let tasks: Vec<StoredTask> = inner.tasks.values().cloned().collect();
        match inner.journal.as_mut() {
            Some(j) => j.snapshot(&tasks),
            None => Ok(()),
        }
    }
}

/// Reads the submitted records and brings them to the form their encoding
/// decodes to, so exported completions decode back to exactly what is
/// stored.
fn normalize(schema: SchemaId, s: &Submission) -> Result<Records, ServiceError> {
    let records = match (&s.records, &s.completion) {
        (Some(v), None) => Records::from_json(schema, v.clone())
            .map_err(|e| ServiceError::Invalid(format!("records do not fit schema {schema}: {e}")))?,
        (None, Some(c)) => decode(schema, c).into_result().map_err(|d| ServiceError::Invalid(d.to_string()))?,
        _ => return Err(ServiceError::Invalid("send exactly one of records or completion".into())),
    };
    let text = encode(schema, &records).map_err(|e| ServiceError::Invalid(e.to_string()))?;
    decode(schema, &text).into_result().map_err(|d| ServiceError::Invalid(d.to_string()))
}
