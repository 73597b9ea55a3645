use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::InferenceParams;
use crate::codec::COMPLETION_STOP;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("no recorded completion for prompt {sha256}")]
    UnknownPrompt { sha256: String },

    #[error("request timed out")]
    Timeout,

    #[error("authentication failed: {0}")]
    Auth(String),

    #[error("rate limited")]
    RateLimit { retry_after: Option<u64> },

    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },

    #[error("transport error: {0}")]
    Transport(String),

    #[error("malformed response: {0}")]
    InvalidResponse(String),

    #[error("replay store: {0}")]
    Store(String),
}

impl BackendError {
    fn retryable(&self) -> bool {
        match self {
            BackendError::RateLimit { .. } | BackendError::Timeout | BackendError::Transport(_) => true,
            BackendError::Http { status, .. } => *status >= 500,
            _ => false,
        }
    }
}

/// A source of model completions.
///
/// `prompt` is the wrapped prompt, separator included. The returned text is
/// the raw model output: when the model stopped on its own it ends with the
/// stop sequence, otherwise it was cut off.
pub trait CompletionBackend: Send + Sync {
    fn complete(&self, prompt: &str, params: &InferenceParams) -> Result<String, BackendError>;
}

impl<B: CompletionBackend + ?Sized> CompletionBackend for std::sync::Arc<B> {
    fn complete(&self, prompt: &str, params: &InferenceParams) -> Result<String, BackendError> {
        (**self).complete(prompt, params)
    }
}

impl<B: CompletionBackend + ?Sized> CompletionBackend for Box<B> {
    fn complete(&self, prompt: &str, params: &InferenceParams) -> Result<String, BackendError> {
        (**self).complete(prompt, params)
    }
}

pub fn prompt_sha256(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

#[derive(Debug, Serialize, Deserialize)]
struct ReplayLine {
    prompt_sha256: String,
    completion: String,
}

/// Recorded completions keyed by the SHA-256 of the wrapped prompt.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReplayStore {
    entries: BTreeMap<String, String>,
}

impl ReplayStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `completion` for an already wrapped prompt.
    pub fn insert(&mut self, prompt: &str, completion: impl Into<String>) {
        self.entries.insert(prompt_sha256(prompt), completion.into());
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses JSON lines of `{"prompt_sha256", "completion"}`. A hash that
    /// appears twice is an error.
    pub fn from_jsonl(s: &str) -> Result<Self, BackendError> {
        let mut entries = BTreeMap::new();
        for (i, line) in s.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let rec: ReplayLine =
                serde_json::from_str(line).map_err(|e| BackendError::Store(format!("line {}: {e}", i + 1)))?;
            if entries.insert(rec.prompt_sha256.clone(), rec.completion).is_some() {
                return Err(BackendError::Store(format!("line {}: duplicate hash {}", i + 1, rec.prompt_sha256)));
            }
        }
        Ok(ReplayStore { entries })
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let s = fs::read_to_string(path).map_err(|e| BackendError::Store(format!("{}: {e}", path.display())))?;
        Self::from_jsonl(&s)
    }

    /// One line per entry, ordered by hash.
    pub fn to_jsonl(&self) -> String {
        self.entries
            .iter()
            .map(|(h, c)| {
                let line = ReplayLine { prompt_sha256: h.clone(), completion: c.clone() };
                serde_json::to_string(&line).expect("replay line serialization cannot fail") + "\n"
            })
            .collect()
    }
}

impl CompletionBackend for ReplayStore {
    fn complete(&self, prompt: &str, _params: &InferenceParams) -> Result<String, BackendError> {
        let sha256 = prompt_sha256(prompt);
        self.entries.get(&sha256).cloned().ok_or(BackendError::UnknownPrompt { sha256 })
    }
}

/// Settings for [`LiveBackend`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiveConfig {
    /// Completions endpoint URL.
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    pub timeout_secs: f64,
    pub max_in_flight: usize,
    /// Extra attempts after a rate limit, timeout, transport failure or 5xx.
    pub max_retries: u32,
    pub retry_backoff_ms: u64,
}

impl LiveConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        LiveConfig {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key_env: "MATEXTRACT_API_KEY".into(),
            timeout_secs: 60.0,
            max_in_flight: 4,
            max_retries: 2,
            retry_backoff_ms: 1000,
        }
    }
}

struct Gate {
    in_flight: Mutex<usize>,
    freed: Condvar,
    limit: usize,
}

impl Gate {
    fn enter(&self) -> GateGuard<'_> {
        let mut n = self.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        while *n >= self.limit {
            n = self.freed.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n += 1;
        GateGuard(self)
    }
}

struct GateGuard<'a>(&'a Gate);

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        *self.0.in_flight.lock().unwrap_or_else(|e| e.into_inner()) -= 1;
        self.0.freed.notify_one();
    }
}

/// Completion client for an HTTP completions API.
///
/// Requests are `POST {model, prompt, max_tokens, temperature, stop}`; the
/// reply's first choice supplies the text. The API drops the stop sequence,
/// so it is appended again when the model finished normally.
///
/// Uses a blocking client: call it from a plain thread, or through
/// `spawn_blocking` inside an async runtime.
pub struct LiveBackend {
    config: LiveConfig,
    api_key: String,
    client: reqwest::blocking::Client,
    gate: Gate,
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    max_tokens: u32,
    temperature: f64,
    stop: &'a str,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    text: String,
    #[serde(default)]
    finish_reason: Option<String>,
}

impl LiveBackend {
    /// Reads the token from `config.api_key_env`.
    pub fn from_env(config: LiveConfig) -> Result<Self, BackendError> {
        let key = std::env::var(&config.api_key_env)
            .map_err(|_| BackendError::Auth(format!("environment variable {} is not set", config.api_key_env)))?;
        Self::with_api_key(config, key)
    }

    pub fn with_api_key(config: LiveConfig, api_key: impl Into<String>) -> Result<Self, BackendError> {
        if !config.timeout_secs.is_finite() || config.timeout_secs <= 0.0 || config.max_in_flight == 0 {
            return Err(BackendError::Transport("timeout and in-flight limit must be positive".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_secs))
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let gate = Gate { in_flight: Mutex::new(0), freed: Condvar::new(), limit: config.max_in_flight };
        Ok(LiveBackend { config, api_key: api_key.into(), client, gate })
    }

    fn attempt(&self, prompt: &str, params: &InferenceParams) -> Result<String, BackendError> {
        let _slot = self.gate.enter();
        let body = CompletionRequest {
            model: &self.config.model,
            prompt,
            max_tokens: params.max_tokens,
            temperature: params.temperature,
            stop: &params.stop,
        };
        let response =
            self.client.post(&self.config.endpoint).bearer_auth(&self.api_key).json(&body).send().map_err(classify)?;
        let status = response.status().as_u16();
        let retry_after = response
            .headers()
            .get(reqwest::header::RETRY_AFTER)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse().ok());
        let text = response.text().map_err(classify)?;
        match status {
            200..=299 => {}
            401 | 403 => return Err(BackendError::Auth(format!("HTTP {status}: {text}"))),
            429 => return Err(BackendError::RateLimit { retry_after }),
            _ => return Err(BackendError::Http { status, body: text }),
        }
        let parsed: CompletionResponse =
            serde_json::from_str(&text).map_err(|e| BackendError::InvalidResponse(e.to_string()))?;
        let choice =
            parsed.choices.into_iter().next().ok_or_else(|| BackendError::InvalidResponse("no choices".into()))?;
        let mut out = choice.text;
        if choice.finish_reason.as_deref() == Some("stop") && !out.contains(COMPLETION_STOP) {
            out.push_str(COMPLETION_STOP);
        }
        Ok(out)
    }
}

fn classify(e: reqwest::Error) -> BackendError {
    if e.is_timeout() {
        BackendError::Timeout
    } else {
        BackendError::Transport(e.to_string())
    }
}

impl CompletionBackend for LiveBackend {
    fn complete(&self, prompt: &str, params: &InferenceParams) -> Result<String, BackendError> {
        let mut tries = 0;
        loop {
            match self.attempt(prompt, params) {
                Err(e) if e.retryable() && tries < self.config.max_retries => {
                    tries += 1;
                    let wait = match e {
                        BackendError::RateLimit { retry_after: Some(s) } => Duration::from_secs(s),
                        _ => Duration::from_millis(self.config.retry_backoff_ms << (tries - 1)),
                    };
                    log::warn!("completion attempt {tries} failed ({e}); retrying in {wait:?}");
                    thread::sleep(wait);
                }
                other => return other,
            }
        }
    }
}
