//! HTTP/JSON session service.
//!
//! | method | path                                   | body / reply |
//! |--------|----------------------------------------|--------------|
//! | POST   | `/api/session`                         | `{"n"?}` → `{session_id, n}` |
//! | GET    | `/api/session/{id}`                    | `{session_id, n, answered, next_trial, status}` |
//! | GET    | `/api/session/{id}/trial/{k}`          | `{trial_index, n, image_url}` |
//! | GET    | `/api/session/{id}/trial/{k}/image`    | image bytes |
//! | POST   | `/api/session/{id}/trial/{k}/response` | `{"choice": "real" \| "synthetic"}` → `{accepted, trial_index, complete}` |
//! | GET    | `/api/session/{id}/result`             | `{n, k_correct, p_value, alpha, verdict, caveat}`, 409 until complete |
//! | GET    | `/api/sessions`                        | `[{session_id, n, answered, status, result?}]` |
//! | GET    | `/api/presets`                         | archetype catalog |
//!
//! Errors reply `{"error": message}` with 400 (malformed body), 404 (unknown
//! session or trial) or 409 (duplicate response, result before completion).
//! Nothing served before a session completes names a stimulus or its kind;
//! image URLs are addressed by trial, not by stimulus.
//!
//! All mutations go through one lock and are appended to the session log
//! before the reply is sent. On start-up the log is replayed, so sessions
//! survive restarts.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use gts_core::distsim::ArchetypeCatalog;
use gts_core::protocol::{
    evaluate, plan_trials_with, Design, Kind, ProtocolError, SessionRecord, SessionStatus, Stimulus, TestResult,
    DEFAULT_ALPHA, DEFAULT_TRIALS, VERDICT_CAVEAT,
};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::log::{read_log, replay, LogRecord, SessionLog, LOG_FILE_NAME};
use crate::manifest::StimulusManifest;
use crate::HarnessError;

/// Largest `n` a client may request.
pub const MAX_TRIALS: usize = 10_000;

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    pub manifest_path: PathBuf,
    pub log_dir: PathBuf,
    pub alpha: f64,
    pub default_n: usize,
    pub design: Design,
    pub ui_dir: Option<PathBuf>,
}

impl ServiceConfig {
    pub fn new(manifest_path: impl Into<PathBuf>, log_dir: impl Into<PathBuf>) -> Self {
        Self {
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            manifest_path: manifest_path.into(),
            log_dir: log_dir.into(),
            alpha: DEFAULT_ALPHA,
            default_n: DEFAULT_TRIALS,
            design: Design::Balanced,
            ui_dir: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(HarnessError::User(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.default_n == 0 || self.default_n > MAX_TRIALS {
            return Err(HarnessError::User(format!("default trial count must lie in 1..={MAX_TRIALS}")));
        }
        if let Some(dir) = &self.ui_dir {
            if !dir.is_dir() {
                return Err(HarnessError::User(format!("UI directory {} not found", dir.display())));
            }
        }
        Ok(())
    }
}

#[derive(Debug)]
struct LiveSession {
    record: SessionRecord,
    stimuli: Vec<Stimulus>,
    alpha: f64,
}

impl LiveSession {
    fn result(&self) -> Result<TestResult, ProtocolError> {
        evaluate(&self.record, &self.stimuli, self.alpha)
    }

    fn image_path(&self, trial: usize) -> Option<&std::path::Path> {
        let id = self.record.plan.stimulus_for(trial)?;
        self.stimuli.iter().find(|s| s.id == id).map(|s| s.image_path.as_path())
    }
}

#[derive(Debug)]
struct Sessions {
    by_id: HashMap<String, LiveSession>,
    order: Vec<String>,
    log: SessionLog,
}

/// Shared service state.
#[derive(Debug)]
pub struct AppState {
    config: ServiceConfig,
    pool: Vec<Stimulus>,
    catalog: ArchetypeCatalog,
    sessions: Mutex<Sessions>,
}

impl AppState {
    /// Loads the manifest, opens the log and replays it.
    pub fn new(config: ServiceConfig) -> Result<Arc<Self>, HarnessError> {
        config.validate()?;
        let manifest = StimulusManifest::load(&config.manifest_path)?;
        let path = config.log_dir.join(LOG_FILE_NAME);
        let log = SessionLog::open(&path)?;
        let mut by_id = HashMap::new();
        let mut order = Vec::new();
        for r in replay(&read_log(&path)?)? {
            order.push(r.id().to_string());
            by_id.insert(r.id().to_string(), LiveSession { record: r.session, stimuli: r.stimuli, alpha: r.alpha });
        }
        Ok(Arc::new(Self {
            config,
            pool: manifest.pool(),
            catalog: ArchetypeCatalog::builtin(),
            sessions: Mutex::new(Sessions { by_id, order, log }),
        }))
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    fn lock(&self) -> MutexGuard<'_, Sessions> {
        // A panic mid-request cannot leave a half-applied change: state is
        // only replaced after the log write succeeds.
        self.sessions.lock().unwrap_or_else(|p| p.into_inner())
    }
}

#[derive(Debug)]
pub struct ApiError(StatusCode, String);

impl ApiError {
    fn bad_request(msg: impl Into<String>) -> Self {
        Self(StatusCode::BAD_REQUEST, msg.into())
    }
    fn not_found(msg: impl Into<String>) -> Self {
        Self(StatusCode::NOT_FOUND, msg.into())
    }
    fn conflict(msg: impl Into<String>) -> Self {
        Self(StatusCode::CONFLICT, msg.into())
    }
}

impl From<HarnessError> for ApiError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::User(m) => Self::bad_request(m),
            HarnessError::Internal(m) => Self(StatusCode::INTERNAL_SERVER_ERROR, m),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    n: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CreateReply {
    pub session_id: String,
    pub n: usize,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SessionReply {
    pub session_id: String,
    pub n: usize,
    pub answered: usize,
    pub next_trial: Option<usize>,
    pub status: SessionStatus,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TrialReply {
    pub trial_index: usize,
    pub n: usize,
    pub image_url: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResponseRequest {
    choice: Kind,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ResponseReply {
    pub accepted: bool,
    pub trial_index: usize,
    pub complete: bool,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ResultReply {
    #[serde(flatten)]
    pub result: TestResult,
    pub caveat: String,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SessionSummary {
    pub session_id: String,
    pub n: usize,
    pub answered: usize,
    pub status: SessionStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<TestResult>,
}

pub fn router(state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/api/session", post(create_session))
        .route("/api/session/{id}", get(session_status))
        .route("/api/session/{id}/trial/{k}", get(trial))
        .route("/api/session/{id}/trial/{k}/image", get(trial_image))
        .route("/api/session/{id}/trial/{k}/response", post(respond))
        .route("/api/session/{id}/result", get(result))
        .route("/api/sessions", get(list_sessions))
        .route("/api/presets", get(presets));
    let api = match &state.config.ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(|| async { ApiError::not_found("no such endpoint") }),
    };
    api.with_state(state)
}

/// Binds `config.bind` and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> Result<(), HarnessError> {
    let state = AppState::new(config)?;
    let bind = state.config.bind;
    let listener =
        tokio::net::TcpListener::bind(bind).await.map_err(|e| HarnessError::User(format!("bind {bind}: {e}")))?;
    let local = listener.local_addr().map_err(|e| HarnessError::Internal(e.to_string()))?;
    println!("serving on http://{local} (log {})", state.lock().log.path().display());
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| HarnessError::Internal(e.to_string()))
}

fn parse_json<T: serde::de::DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed body: {e}")))
}

fn trial_index(raw: &str, session: &LiveSession) -> ApiResult<usize> {
    raw.parse::<usize>()
        .ok()
        .filter(|&k| k < session.record.plan.n)
        .ok_or_else(|| ApiError::not_found(format!("no trial {raw}")))
}

fn unknown(id: &str) -> ApiError {
    ApiError::not_found(format!("unknown session {id}"))
}

async fn create_session(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<(StatusCode, Json<CreateReply>)> {
    let req: CreateRequest =
        if body.iter().all(u8::is_ascii_whitespace) { CreateRequest::default() } else { parse_json(&body)? };
    let n = req.n.unwrap_or(state.config.default_n);
    if n == 0 || n > MAX_TRIALS {
        return Err(ApiError::bad_request(format!("n must lie in 1..={MAX_TRIALS}")));
    }
    let session_id = uuid::Uuid::new_v4().simple().to_string();
    let mut plan = plan_trials_with(&state.pool, n, rand::random(), state.config.design)
        .map_err(|e| ApiError::from(HarnessError::from(e)))?;
    plan.session_id = session_id.clone();
    let mut sessions = state.lock();
    sessions.log.append(&LogRecord::PlanCreated {
        session_id: session_id.clone(),
        alpha: state.config.alpha,
        plan: plan.clone(),
        stimuli: state.pool.clone(),
    })?;
    sessions.order.push(session_id.clone());
    sessions.by_id.insert(
        session_id.clone(),
        LiveSession { record: SessionRecord::new(plan), stimuli: state.pool.clone(), alpha: state.config.alpha },
    );
    Ok((StatusCode::CREATED, Json(CreateReply { session_id, n })))
}

async fn session_status(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<SessionReply>> {
    let sessions = state.lock();
    let s = sessions.by_id.get(&id).ok_or_else(|| unknown(&id))?;
    Ok(Json(SessionReply {
        session_id: id.clone(),
        n: s.record.plan.n,
        answered: s.record.responses.len(),
        next_trial: s.record.first_unanswered(),
        status: s.record.status,
    }))
}

async fn trial(
    State(state): State<Arc<AppState>>,
    Path((id, k)): Path<(String, String)>,
) -> ApiResult<Json<TrialReply>> {
    let sessions = state.lock();
    let s = sessions.by_id.get(&id).ok_or_else(|| unknown(&id))?;
    let k = trial_index(&k, s)?;
    Ok(Json(TrialReply { trial_index: k, n: s.record.plan.n, image_url: format!("/api/session/{id}/trial/{k}/image") }))
}

async fn trial_image(State(state): State<Arc<AppState>>, Path((id, k)): Path<(String, String)>) -> ApiResult<Response> {
    let path = {
        let sessions = state.lock();
        let s = sessions.by_id.get(&id).ok_or_else(|| unknown(&id))?;
        let k = trial_index(&k, s)?;
        s.image_path(k)
            .ok_or_else(|| ApiError(StatusCode::INTERNAL_SERVER_ERROR, "trial has no image".into()))?
            .to_path_buf()
    };
    let bytes = tokio::fs::read(&path)
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, format!("stimulus image unavailable: {e}")))?;
    let mime = match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("ppm") => "image/x-portable-pixmap",
        _ => "application/octet-stream",
    };
    Ok(([(header::CONTENT_TYPE, mime), (header::CACHE_CONTROL, "no-store")], bytes).into_response())
}

async fn respond(
    State(state): State<Arc<AppState>>,
    Path((id, k)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult<Json<ResponseReply>> {
    let req: ResponseRequest = parse_json(&body)?;
    let mut guard = state.lock();
    let sessions = &mut *guard;
    let s = sessions.by_id.get_mut(&id).ok_or_else(|| unknown(&id))?;
    let k = trial_index(&k, s)?;
    let timestamp_ms = crate::now_ms();
    let mut next = s.record.clone();
    next.record_response(k, req.choice, timestamp_ms).map_err(|e| match e {
        ProtocolError::Conflict(m) | ProtocolError::State(m) => ApiError::conflict(m),
        other => ApiError::bad_request(other.to_string()),
    })?;
    sessions.log.append(&LogRecord::Response {
        session_id: id.clone(),
        trial_index: k,
        choice: req.choice,
        timestamp_ms,
    })?;
    s.record = next;
    let complete = s.record.is_complete();
    if complete {
        // The response is already durable; the evaluation record is derived
        // data, so a failure here is reported but does not undo the answer.
        match s.result() {
            Ok(result) => {
                if let Err(e) = sessions.log.append(&LogRecord::Evaluation { session_id: id.clone(), result }) {
                    eprintln!("session {id}: evaluation not logged: {e}");
                }
            }
            Err(e) => eprintln!("session {id}: evaluation failed: {e}"),
        }
    }
    Ok(Json(ResponseReply { accepted: true, trial_index: k, complete }))
}

async fn result(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<ResultReply>> {
    let sessions = state.lock();
    let s = sessions.by_id.get(&id).ok_or_else(|| unknown(&id))?;
    if !s.record.is_complete() {
        return Err(ApiError::conflict(format!(
            "session {id} has {} of {} responses",
            s.record.responses.len(),
            s.record.plan.n
        )));
    }
    let result = s.result().map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    Ok(Json(ResultReply { result, caveat: VERDICT_CAVEAT.to_string() }))
}

async fn list_sessions(State(state): State<Arc<AppState>>) -> ApiResult<Json<Vec<SessionSummary>>> {
    let sessions = state.lock();
    let rows = sessions
        .order
        .iter()
        .map(|id| {
            let s = &sessions.by_id[id];
            SessionSummary {
                session_id: id.clone(),
                n: s.record.plan.n,
                answered: s.record.responses.len(),
                status: s.record.status,
                result: s.result().ok(),
            }
        })
        .collect();
    Ok(Json(rows))
}

async fn presets(State(state): State<Arc<AppState>>) -> Json<ArchetypeCatalog> {
    Json(state.catalog.clone())
}
