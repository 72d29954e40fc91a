//! HTTP front end for human play sessions.
//!
//! ```text
//! POST /sessions                  {"game","level","seed"?,"flags"?}
//! GET  /sessions/{id}
//! POST /sessions/{id}/actions     {"action": ...}
//! GET  /sessions/{id}/log         JSONL, once the episode has ended
//! ```
//!
//! Errors are `{"error": {"code", "message"}}`.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use gridbench_core::session::{CreateRequest, SessionError, SessionManager};
use serde_json::Value;
use tower_http::services::ServeDir;

pub type Shared = Arc<SessionManager>;

pub struct ApiError(SessionError);

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        ApiError(e)
    }
}

pub fn status_for(e: &SessionError) -> StatusCode {
    match e {
        SessionError::NotFound(_) => StatusCode::NOT_FOUND,
        SessionError::Finished | SessionError::InProgress => StatusCode::CONFLICT,
        SessionError::InvalidLevel(_) | SessionError::MalformedAction(_) => StatusCode::BAD_REQUEST,
        SessionError::Engine { .. } => StatusCode::UNPROCESSABLE_ENTITY,
        SessionError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (status_for(&self.0), Json(self.0.to_json())).into_response()
    }
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &Bytes, err: fn(String) -> SessionError) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError(err(e.to_string())))
}

async fn create(State(m): State<Shared>, body: Bytes) -> Result<(StatusCode, Json<Value>), ApiError> {
    let req: CreateRequest = parse_body(&body, SessionError::InvalidLevel)?;
    Ok((StatusCode::CREATED, Json(m.create(&req)?)))
}

async fn state(State(m): State<Shared>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    Ok(Json(m.get_state(&id)?))
}

async fn action(State(m): State<Shared>, Path(id): Path<String>, body: Bytes) -> Result<Json<Value>, ApiError> {
    let payload: Value = parse_body(&body, SessionError::MalformedAction)?;
    Ok(Json(m.post_action(&id, &payload)?))
}

async fn log(State(m): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let log = m.get_log(&id)?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], log.to_jsonl()).into_response())
}

/// The session API, plus the browser client's files under `/` when given.
pub fn router(manager: Shared, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(state))
        .route("/sessions/{id}/actions", post(action))
        .route("/sessions/{id}/log", get(log))
        .with_state(manager);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Periodically finalizes idle sessions until the runtime shuts down.
pub fn spawn_reaper(manager: Shared, every: Duration) -> tokio::task::JoinHandle<()> {
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(every);
        loop {
            tick.tick().await;
            let n = manager.expire_idle(Instant::now());
            if n > 0 {
                tracing::info!(expired = n, "finalized idle sessions");
            }
        }
    })
}
