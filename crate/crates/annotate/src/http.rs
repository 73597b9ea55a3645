//! REST front end. Handlers run the blocking service calls on the blocking
//! thread pool, since a claim may wait on a model backend.

use std::future::Future;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use matextract::records::SchemaId;
use serde::Deserialize;

use crate::model::{NewTask, Submission, TaskId};
use crate::{AnnotationService, ServiceError};

#[derive(Clone)]
struct AppState {
    service: Arc<AnnotationService>,
    token: Option<Arc<str>>,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::QueueEmpty => return StatusCode::NO_CONTENT.into_response(),
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Conflict(_) => StatusCode::CONFLICT,
            ServiceError::Invalid(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::EmptyData => StatusCode::NOT_FOUND,
            ServiceError::Journal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(serde_json::json!({ "error": self.to_string() }))).into_response()
    }
}

fn error(status: StatusCode, msg: impl Into<String>) -> Response {
    (status, Json(serde_json::json!({ "error": msg.into() }))).into_response()
}

// a Response is large, but this is built once per request
#[allow(clippy::result_large_err)]
fn authorized(state: &AppState, headers: &HeaderMap) -> Result<(), Response> {
    let Some(token) = &state.token else { return Ok(()) };
    let given =
        headers.get(header::AUTHORIZATION).and_then(|v| v.to_str().ok()).and_then(|v| v.strip_prefix("Bearer "));
    if given == Some(&**token) {
        Ok(())
    } else {
        Err(error(StatusCode::UNAUTHORIZED, "missing or wrong bearer token"))
    }
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, Response> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(IntoResponse::into_response),
        Err(e) => Err(error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())),
    }
}

#[derive(Deserialize)]
struct NextQuery {
    annotator: String,
}

async fn next_task(State(s): State<AppState>, headers: HeaderMap, Query(q): Query<NextQuery>) -> Response {
    if let Err(r) = authorized(&s, &headers) {
        return r;
    }
    let svc = s.service.clone();
    match blocking(move || svc.next_task(&q.annotator)).await {
        Ok(task) => Json(task).into_response(),
        Err(r) => r,
    }
}

async fn submit(
    State(s): State<AppState>,
    headers: HeaderMap,
    Path(id): Path<TaskId>,
    Json(body): Json<Submission>,
) -> Response {
    if let Err(r) = authorized(&s, &headers) {
        return r;
    }
    let svc = s.service.clone();
    match blocking(move || svc.submit(id, body)).await {
        Ok(result) => Json(result).into_response(),
        Err(r) => r,
    }
}

#[derive(Deserialize)]
struct ExportQuery {
    schema: Option<String>,
}

async fn export(State(s): State<AppState>, headers: HeaderMap, Query(q): Query<ExportQuery>) -> Response {
    if let Err(r) = authorized(&s, &headers) {
        return r;
    }
    let schema = match q.schema.as_deref().map(str::parse::<SchemaId>).transpose() {
        Ok(schema) => schema,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };
    Json(s.service.export(schema)).into_response()
}

async fn stats(State(s): State<AppState>, headers: HeaderMap) -> Response {
    if let Err(r) = authorized(&s, &headers) {
        return r;
    }
    let timing = match s.service.timing_report() {
        Ok(t) => Some(t),
        Err(ServiceError::EmptyData) => None,
        Err(e) => return e.into_response(),
    };
    Json(serde_json::json!({ "queue": s.service.queue_stats(), "timing": timing })).into_response()
}

async fn add_tasks(State(s): State<AppState>, headers: HeaderMap, Json(body): Json<Vec<NewTask>>) -> Response {
    if let Err(r) = authorized(&s, &headers) {
        return r;
    }
    let svc = s.service.clone();
    match blocking(move || svc.add_tasks(body)).await {
        Ok(ids) => (StatusCode::CREATED, Json(serde_json::json!({ "task_ids": ids }))).into_response(),
        Err(r) => r,
    }
}

/// Routes over `service`; with a `token`, every request needs
/// `Authorization: Bearer <token>`.
pub fn router(service: Arc<AnnotationService>, token: Option<String>) -> Router {
    let state = AppState { service, token: token.map(Arc::from) };
    Router::new()
        .route("/tasks", post(add_tasks))
        .route("/tasks/next", get(next_task))
        .route("/tasks/{id}/submit", post(submit))
        .route("/export", get(export))
        .route("/stats", get(stats))
        .with_state(state)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    service: Arc<AnnotationService>,
    token: Option<String>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(service, token)).with_graceful_shutdown(shutdown).await
}

/// Binds `addr` and serves until Ctrl-C.
pub async fn serve_until_interrupted(
    addr: SocketAddr,
    service: Arc<AnnotationService>,
    token: Option<String>,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("annotation service listening on {}", listener.local_addr()?);
    serve(listener, service, token, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}
