//! HTTP/JSON API for the evaluation service.
//!
//! | method | path                          | body                          | reply                   |
//! |--------|-------------------------------|-------------------------------|-------------------------|
//! | POST   | `/sessions`                   | `{annotator, strategy?}`      | 201, session view       |
//! | GET    | `/sessions/{id}`              |                               | session view            |
//! | POST   | `/sessions/{id}/messages`     | `{text}`                      | `{text, pairs, state}`  |
//! | POST   | `/sessions/{id}/annotation`   | `{annotator, overall, good_pairs, bad_pairs}` | 201, `{session_id, state}` |
//! | GET    | `/questionnaire`              |                               | `{questions: [...]}`    |
//! | GET    | `/transcripts`                |                               | array of transcript records |
//! | GET    | `/health`                     |                               | `{status: "ok"}`        |
//!
//! Errors are `{"error": {"code", "message"}}` with these statuses:
//! `not_found` 404, `state` 409, `protocol` 409, `quota` 403,
//! `validation` 422, `bad_request` 400, `internal` 500.
//!
//! The session view never includes the assigned strategy or candidate sets.

mod config;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use dialsearch::evalsvc::{AnnotationRecord, EvalError, EvalService, Questionnaire, SessionState};
use dialsearch::lm::DistributionProvider;
use dialsearch::search::Strategy;

pub use config::{load_service, ConfigError, ServerConfig};

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn bad_request(message: String) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code: "bad_request",
            message,
        }
    }
}

impl From<EvalError> for ApiError {
    fn from(e: EvalError) -> Self {
        let (status, code) = match &e {
            EvalError::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
            EvalError::State { .. } => (StatusCode::CONFLICT, "state"),
            EvalError::Protocol(_) => (StatusCode::CONFLICT, "protocol"),
            EvalError::Quota { .. } => (StatusCode::FORBIDDEN, "quota"),
            EvalError::Validation(_) => (StatusCode::UNPROCESSABLE_ENTITY, "validation"),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        ApiError {
            status,
            code,
            message: e.to_string(),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub annotator: String,
    #[serde(default)]
    pub strategy: Option<Strategy>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PostMessage {
    pub text: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Stored {
    pub session_id: String,
    pub state: SessionState,
}

type Svc<M> = Arc<EvalService<M>>;

pub fn router<M>(service: Svc<M>) -> Router
where
    M: DistributionProvider + Send + Sync + 'static,
{
    Router::new()
        .route("/health", get(|| async { Json(json!({ "status": "ok" })) }))
        .route("/questionnaire", get(questionnaire))
        .route("/sessions", post(create_session::<M>))
        .route("/sessions/{id}", get(get_session::<M>))
        .route("/sessions/{id}/messages", post(post_message::<M>))
        .route("/sessions/{id}/annotation", post(submit_annotation::<M>))
        .route("/transcripts", get(transcripts::<M>))
        .with_state(service)
}

async fn questionnaire() -> Json<Questionnaire> {
    Json(Questionnaire::default())
}

/// Runs a service call off the async executor; decoding can take a while.
async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, EvalError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            code: "internal",
            message: e.to_string(),
        })?
        .map_err(ApiError::from)
}

async fn create_session<M>(
    State(svc): State<Svc<M>>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<Response, ApiError>
where
    M: DistributionProvider + Send + Sync + 'static,
{
    let Json(req) = body?;
    let view = svc.create_session(&req.annotator, req.strategy)?;
    Ok((StatusCode::CREATED, Json(view)).into_response())
}

async fn get_session<M>(State(svc): State<Svc<M>>, Path(id): Path<String>) -> Result<Response, ApiError>
where
    M: DistributionProvider + Send + Sync + 'static,
{
    Ok(Json(svc.get_session(&id)?).into_response())
}

async fn post_message<M>(
    State(svc): State<Svc<M>>,
    Path(id): Path<String>,
    body: Result<Json<PostMessage>, JsonRejection>,
) -> Result<Response, ApiError>
where
    M: DistributionProvider + Send + Sync + 'static,
{
    let Json(req) = body?;
    let reply = blocking(move || svc.post_message(&id, &req.text)).await?;
    Ok(Json(reply).into_response())
}

async fn submit_annotation<M>(
    State(svc): State<Svc<M>>,
    Path(id): Path<String>,
    body: Result<Json<AnnotationRecord>, JsonRejection>,
) -> Result<Response, ApiError>
where
    M: DistributionProvider + Send + Sync + 'static,
{
    let Json(ann) = body?;
    let record = blocking(move || svc.submit_annotation(&id, &ann)).await?;
    let stored = Stored {
        session_id: record.session_id,
        state: SessionState::Closed,
    };
    Ok((StatusCode::CREATED, Json(stored)).into_response())
}

async fn transcripts<M>(State(svc): State<Svc<M>>) -> Result<Response, ApiError>
where
    M: DistributionProvider + Send + Sync + 'static,
{
    let records = blocking(move || svc.transcripts()).await?;
    Ok(Json(records).into_response())
}

/// Serves `router` on `addr` until ctrl-c.
pub async fn serve(router: Router, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
