//! HTTP service for human elicitation sessions.
//!
//! | method | path | body |
//! |---|---|---|
//! | POST | `/api/sessions` | `{subject_id?, seed?}` |
//! | GET | `/api/sessions/{id}` | |
//! | POST | `/api/sessions/{id}/reports` | [`SubmitRequest`] |
//! | POST | `/api/sessions/{id}/finalize` | `{seed?}` |
//!
//! All but creation need the `x-session-token` header returned on creation.
//! Anything else is served from the static directory, if one is given.

mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Result;
use axum::extract::{Path, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;

pub use store::{
    Finalized, PublicReports, PublicSession, PublicTask, SessionStore, StoreError, SubmitOutcome, SubmitRequest,
};

pub const TOKEN_HEADER: &str = "x-session-token";

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
pub struct CreateRequest {
    #[serde(default)]
    pub subject_id: Option<String>,
    /// Fixes the plan; random when absent.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateResponse {
    pub token: String,
    #[serde(flatten)]
    pub session: PublicSession,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
pub struct FinalizeRequest {
    /// Fixes the lottery draws; random when absent.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl IntoResponse for StoreError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            StoreError::NotFound => (StatusCode::NOT_FOUND, json!({"error": "no such session"})),
            StoreError::Unauthorized => (
                StatusCode::UNAUTHORIZED,
                json!({"error": format!("missing or wrong {TOKEN_HEADER}")}),
            ),
            StoreError::Invalid(m) => (StatusCode::UNPROCESSABLE_ENTITY, json!({"error": m})),
            StoreError::Conflict(m) => (StatusCode::CONFLICT, json!({"error": m})),
            StoreError::Incomplete(missing) => {
                let list: Vec<String> = missing.iter().map(|m| m.to_string()).collect();
                (
                    StatusCode::CONFLICT,
                    json!({"error": format!("session incomplete; missing {}", list.join(", ")), "missing": list}),
                )
            }
            StoreError::Io(m) => (StatusCode::INTERNAL_SERVER_ERROR, json!({"error": m})),
        };
        (status, Json(body)).into_response()
    }
}

fn token(headers: &HeaderMap) -> &str {
    headers.get(TOKEN_HEADER).and_then(|v| v.to_str().ok()).unwrap_or_default()
}

async fn create(
    State(store): State<Arc<SessionStore>>,
    body: Option<Json<CreateRequest>>,
) -> Result<(StatusCode, Json<CreateResponse>), StoreError> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let (session, token) = store.create(req.subject_id, req.seed).await?;
    Ok((StatusCode::CREATED, Json(CreateResponse { token, session })))
}

async fn status(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Result<Json<PublicSession>, StoreError> {
    store.status(&id, token(&headers)).await.map(Json)
}

async fn submit(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    Json(req): Json<SubmitRequest>,
) -> Result<(StatusCode, Json<SubmitOutcome>), StoreError> {
    let out = store.submit(&id, token(&headers), req).await?;
    let code = if out.replay { StatusCode::OK } else { StatusCode::CREATED };
    Ok((code, Json(out)))
}

async fn finalize(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Option<Json<FinalizeRequest>>,
) -> Result<Json<Finalized>, StoreError> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    store.finalize(&id, token(&headers), req.seed).await.map(Json)
}

async fn not_found() -> Response {
    (StatusCode::NOT_FOUND, Json(json!({"error": "not found"}))).into_response()
}

pub fn router(store: Arc<SessionStore>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/sessions", post(create))
        .route("/api/sessions/{id}", get(status))
        .route("/api/sessions/{id}/reports", post(submit))
        .route("/api/sessions/{id}/finalize", post(finalize))
        .with_state(store);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(not_found),
    }
}

pub async fn run(addr: SocketAddr, data: PathBuf, static_dir: Option<PathBuf>) -> Result<()> {
    let store = Arc::new(SessionStore::open(data)?);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!(
        "serving on http://{}, sessions in {}",
        listener.local_addr()?,
        store.root().display()
    );
    axum::serve(listener, router(store, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
