//! Concurrency scenario shared by the service tests and the acceptance
//! runner.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use matextract::records::SchemaId;
use matextract::scoring::parsability_rate;
use matextract_annotate::{http, AnnotationService, SystemClock};

/// A running HTTP server on an ephemeral port. Dropping it stops the server.
pub struct Server {
    pub base: String,
    pub service: Arc<AnnotationService>,
    runtime: Option<tokio::runtime::Runtime>,
}

impl Drop for Server {
    fn drop(&mut self) {
        if let Some(rt) = self.runtime.take() {
            rt.shutdown_background();
        }
    }
}

pub fn start(service: Arc<AnnotationService>, token: Option<String>) -> Server {
    let runtime = tokio::runtime::Builder::new_multi_thread().worker_threads(4).enable_all().build().unwrap();
    let listener = runtime.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let svc = service.clone();
    runtime.spawn(async move { http::serve(listener, svc, token, std::future::pending()).await });
    Server { base, service, runtime: Some(runtime) }
}

pub fn client() -> reqwest::blocking::Client {
    reqwest::blocking::Client::builder().timeout(Duration::from_secs(20)).build().unwrap()
}

/// 8 clients race over 100 tasks through the REST API: every task is
/// claimed exactly once, every claim is submitted, the export holds one
/// pair per submission and all of them decode.
pub fn check_racing_clients() -> Result<String, String> {
    const CLIENTS: usize = 8;
    const TASKS: usize = 100;
    let started = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let service = AnnotationService::open(&dir.path().join("journal.jsonl"), 25, Arc::new(SystemClock::default()))
        .map_err(|e| e.to_string())?;
    let server = start(Arc::new(service), None);

    let tasks: Vec<serde_json::Value> = (0..TASKS)
        .map(|i| serde_json::json!({ "prompt": format!("Passage {i} about X{i}-doped ZnO."), "schema": "doping-eng" }))
        .collect();
    let resp = client().post(format!("{}/tasks", server.base)).json(&tasks).send().map_err(|e| e.to_string())?;
    if resp.status().as_u16() != 201 {
        return Err(format!("ingest returned {}", resp.status()));
    }

    let handles: Vec<_> = (0..CLIENTS)
        .map(|c| {
            let base = server.base.clone();
            thread::spawn(move || -> Result<(Vec<u64>, usize), String> {
                let http = client();
                let annotator = format!("annotator-{c}");
                let (mut claimed, mut submitted) = (Vec::new(), 0);
                loop {
                    let r = http
                        .get(format!("{base}/tasks/next?annotator={annotator}"))
                        .send()
                        .map_err(|e| e.to_string())?;
                    if r.status().as_u16() == 204 {
                        return Ok((claimed, submitted));
                    }
                    let task: serde_json::Value = r.json().map_err(|e| e.to_string())?;
                    let id = task["task_id"].as_u64().ok_or("task without id")?;
                    claimed.push(id);
                    let body = serde_json::json!({
                        "annotator": annotator,
                        "completion": format!("The host 'ZnO' was doped with 'X{id}'."),
                    });
                    let r =
                        http.post(format!("{base}/tasks/{id}/submit")).json(&body).send().map_err(|e| e.to_string())?;
                    if !r.status().is_success() {
                        return Err(format!("submit {id}: {}", r.status()));
                    }
                    submitted += 1;
                }
            })
        })
        .collect();

    let mut claims: BTreeMap<u64, usize> = BTreeMap::new();
    let mut submits = 0;
    for h in handles {
        let (ids, n) = h.join().map_err(|_| "client thread panicked".to_string())??;
        for id in ids {
            *claims.entry(id).or_default() += 1;
        }
        submits += n;
    }
    if claims.len() != TASKS || claims.values().any(|&n| n != 1) {
        let twice: Vec<_> = claims.iter().filter(|(_, n)| **n != 1).collect();
        return Err(format!("{} distinct claims, multiply claimed: {twice:?}", claims.len()));
    }

    let export: Vec<serde_json::Value> =
        client().get(format!("{}/export", server.base)).send().and_then(|r| r.json()).map_err(|e| e.to_string())?;
    if export.len() != submits {
        return Err(format!("export has {} pairs for {submits} submissions", export.len()));
    }
    let completions: Vec<&str> = export.iter().filter_map(|p| p["completion"].as_str()).collect();
    let rate = parsability_rate(SchemaId::DopingEng, &completions).map_err(|e| e.to_string())?;
    if rate != 1.0 {
        return Err(format!("export parsability {rate}"));
    }
    let elapsed = started.elapsed();
    if elapsed > Duration::from_secs(30) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!(
        "{CLIENTS} clients, {TASKS} tasks claimed once each, {submits} exported, parsability 1.0, {elapsed:.2?}"
    ))
}
