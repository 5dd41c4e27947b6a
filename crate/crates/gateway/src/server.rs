//! HTTP surface: `/aiCompletionStream` (SSE), `/synonyms`, `/rewrite`,
//! `/cancel`, `/healthz`.

use std::convert::Infallible;

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::sse::{Event, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::{Stream, StreamExt, TryStreamExt};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::provider::ProviderRequest;
use crate::relay::{Relay, RelayError};
use crate::synonyms::{parse_synonyms, Synonyms};
use crate::templates::{render_prompt, GenerationRequest, PromptError, TemplateId};

#[derive(Clone)]
pub struct AppState {
    pub relay: Relay,
    pub provider_kind: &'static str,
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Relay(#[from] RelayError),
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    Upstream(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self {
            ApiError::Prompt(_) | ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::Relay(_) => StatusCode::CONFLICT,
            ApiError::Upstream(_) => StatusCode::BAD_GATEWAY,
        };
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/aiCompletionStream", post(completion_stream))
        .route("/synonyms", post(synonyms))
        .route("/rewrite", post(rewrite))
        .route("/cancel", post(cancel))
        .route("/healthz", get(healthz))
        .with_state(state)
}

fn provider_request(req: &GenerationRequest) -> Result<ProviderRequest, PromptError> {
    let (system, user) = render_prompt(req)?;
    Ok(ProviderRequest { request_id: req.request_id, system, user, max_sentences: req.max_sentences })
}

async fn completion_stream(
    State(state): State<AppState>,
    Json(req): Json<GenerationRequest>,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    let preq = provider_request(&req)?;
    let stream = state.relay.start(preq)?;
    tracing::debug!(request_id = req.request_id, template = ?req.template, "stream started");
    let events = stream.map(|chunk| Ok(Event::default().data(serde_json::to_string(&chunk).expect("chunk serializes"))));
    Ok(Sse::new(events))
}

/// Runs a request to completion and returns the whole answer.
async fn complete(state: &AppState, req: &GenerationRequest) -> Result<String, ApiError> {
    let preq = provider_request(req)?;
    state
        .relay
        .provider()
        .stream(preq)
        .try_collect::<Vec<String>>()
        .await
        .map(|parts| parts.concat())
        .map_err(|e| ApiError::Upstream(e.to_string()))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SynonymBody {
    pub word: String,
    #[serde(default)]
    pub request_id: u64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct SynonymReply {
    pub synonyms: Vec<String>,
    pub no_synonym: bool,
}

async fn synonyms(State(state): State<AppState>, Json(body): Json<SynonymBody>) -> Result<Json<SynonymReply>, ApiError> {
    let req = GenerationRequest::new(body.request_id, TemplateId::Synonym, &[("word", &body.word)]);
    let raw = complete(&state, &req).await?;
    Ok(Json(match parse_synonyms(&raw) {
        Synonyms::Words(synonyms) => SynonymReply { synonyms, no_synonym: false },
        Synonyms::NoSynonym => SynonymReply { synonyms: Vec::new(), no_synonym: true },
    }))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RewriteBody {
    pub sentence: String,
    /// Tone for a rewrite, e.g. "professional".
    #[serde(default, rename = "type")]
    pub tone: Option<String>,
    /// Free-form instruction; takes precedence over `type`.
    #[serde(default)]
    pub prompt: Option<String>,
    #[serde(default)]
    pub request_id: u64,
}

async fn rewrite(State(state): State<AppState>, Json(body): Json<RewriteBody>) -> Result<Json<serde_json::Value>, ApiError> {
    let req = match (&body.prompt, &body.tone) {
        (Some(p), _) => {
            GenerationRequest::new(body.request_id, TemplateId::CustomSentence, &[("sentence", &body.sentence), ("prompt", p)])
        }
        (None, Some(t)) => {
            GenerationRequest::new(body.request_id, TemplateId::RewriteSentence, &[("sentence", &body.sentence), ("type", t)])
        }
        (None, None) => return Err(ApiError::BadRequest("rewrite needs `type` or `prompt`".into())),
    };
    let text = complete(&state, &req).await?;
    Ok(Json(json!({ "text": text })))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CancelBody {
    pub request_id: u64,
}

async fn cancel(State(state): State<AppState>, Json(body): Json<CancelBody>) -> Json<serde_json::Value> {
    Json(json!({ "cancelled": state.relay.cancel(body.request_id) }))
}

async fn healthz(State(state): State<AppState>) -> Json<serde_json::Value> {
    Json(json!({ "status": "ok", "provider": state.provider_kind, "active": state.relay.active() }))
}
