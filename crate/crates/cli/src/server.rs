//! REST API consumed by the web UI, plus static asset serving.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use keke_core::evaluator::{report_file_name, report_from_json, report_to_json};
use keke_core::{Action, GameState};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::Mutex;
use tower_http::services::ServeDir;
use uuid::Uuid;

use crate::commands::ServeArgs;
use crate::service::{evaluate, store_report, Frame, RunOptions};
use crate::store::{agent_by_name, LevelStore, AGENT_NAMES};

/// Directory holding the built web UI; defaults to `webui/dist`.
pub const WEBUI_DIR_ENV: &str = "KEKE_WEBUI_DIR";
pub const SESSION_IDLE: Duration = Duration::from_secs(30 * 60);

struct Session {
    state: GameState,
    last_used: Instant,
}

pub struct AppState {
    store: LevelStore,
    reports_dir: PathBuf,
    idle_timeout: Duration,
    eval_gate: Mutex<()>,
    sessions: Mutex<HashMap<Uuid, Session>>,
}

impl AppState {
    pub fn new(store: LevelStore, reports_dir: impl Into<PathBuf>) -> Self {
        AppState {
            store,
            reports_dir: reports_dir.into(),
            idle_timeout: SESSION_IDLE,
            eval_gate: Mutex::new(()),
            sessions: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_idle_timeout(mut self, timeout: Duration) -> Self {
        self.idle_timeout = timeout;
        self
    }

    pub async fn session_count(&self) -> usize {
        let mut sessions = self.sessions.lock().await;
        self.expire(&mut sessions);
        sessions.len()
    }

    fn expire(&self, sessions: &mut HashMap<Uuid, Session>) {
        let timeout = self.idle_timeout;
        sessions.retain(|_, s| s.last_used.elapsed() < timeout);
    }
}

type Shared = Arc<AppState>;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn internal(err: anyhow::Error) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, format!("{err:#}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

fn json_text(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

pub fn router(state: AppState) -> Router {
    let webui = std::env::var_os(WEBUI_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("webui/dist"));
    api_router(state).fallback_service(ServeDir::new(webui))
}

/// The API routes alone, without the static fallback.
pub fn api_router(state: AppState) -> Router {
    Router::new()
        .route("/api/levelsets", get(list_levelsets))
        .route("/api/levelsets/{name}", get(get_levelset))
        .route("/api/agents", get(list_agents))
        .route("/api/evaluate", post(post_evaluate))
        .route("/api/reports", get(list_reports))
        .route("/api/reports/{agent}/{levelset}", get(get_report))
        .route("/api/play/new", post(new_session))
        .route("/api/play/{session}/action", post(session_action))
        .route("/api/play/{session}", delete(delete_session))
        .with_state(Arc::new(state))
}

async fn list_levelsets(State(app): State<Shared>) -> Json<Vec<String>> {
    Json(app.store.names())
}

async fn get_levelset(State(app): State<Shared>, UrlPath(name): UrlPath<String>) -> ApiResult<Response> {
    let set = app
        .store
        .get(&name)
        .ok_or_else(|| ApiError::not_found(format!("unknown level set {name:?}")))?;
    Ok(json_text(set.to_json()))
}

async fn list_agents() -> Json<Vec<&'static str>> {
    Json(AGENT_NAMES.to_vec())
}

#[derive(Debug, Deserialize)]
pub struct EvaluateRequest {
    pub agent: String,
    pub levelset: String,
    #[serde(flatten)]
    pub options: RunOptions,
}

async fn post_evaluate(State(app): State<Shared>, Json(req): Json<EvaluateRequest>) -> ApiResult<Response> {
    if agent_by_name(&req.agent, 0).is_none() {
        return Err(ApiError::bad_request(format!("unknown agent {:?}", req.agent)));
    }
    let set = app
        .store
        .get(&req.levelset)
        .cloned()
        .ok_or_else(|| ApiError::not_found(format!("unknown level set {:?}", req.levelset)))?;
    req.options
        .budget()
        .map_err(|e| ApiError::bad_request(format!("{e:#}")))?;

    // One evaluation at a time so wall-clock scores are not skewed by
    // concurrent runs.
    let _gate = app.eval_gate.lock().await;
    let dir = app.reports_dir.clone();
    let report = tokio::task::spawn_blocking(move || {
        let report = evaluate(&req.agent, &set, &req.options)?;
        store_report(&dir, &report)?;
        Ok::<_, anyhow::Error>(report)
    })
    .await
    .map_err(|e| ApiError::internal(e.into()))?
    .map_err(ApiError::internal)?;
    Ok(json_text(report_to_json(&report)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub agent: String,
    pub levelset: String,
}

fn report_entries(dir: &Path) -> Vec<ReportEntry> {
    let Ok(entries) = std::fs::read_dir(dir) else {
        return Vec::new();
    };
    let mut out: Vec<ReportEntry> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().into_string().ok()?;
            let stem = name.strip_suffix(".json")?;
            let (agent, levelset) = stem.split_once("__")?;
            Some(ReportEntry {
                agent: agent.to_string(),
                levelset: levelset.to_string(),
            })
        })
        .collect();
    out.sort_by(|a, b| (&a.agent, &a.levelset).cmp(&(&b.agent, &b.levelset)));
    out
}

async fn list_reports(State(app): State<Shared>) -> Json<Vec<ReportEntry>> {
    Json(report_entries(&app.reports_dir))
}

fn safe_component(s: &str) -> bool {
    !s.is_empty() && !s.contains(['/', '\\']) && s != "." && s != ".."
}

async fn get_report(
    State(app): State<Shared>,
    UrlPath((agent, levelset)): UrlPath<(String, String)>,
) -> ApiResult<Response> {
    if !safe_component(&agent) || !safe_component(&levelset) {
        return Err(ApiError::bad_request("invalid report name"));
    }
    let path = app.reports_dir.join(report_file_name(&agent, &levelset));
    let text = std::fs::read_to_string(&path)
        .map_err(|_| ApiError::not_found(format!("no report for agent {agent:?} on {levelset:?}")))?;
    report_from_json(&text).map_err(|e| ApiError::internal(anyhow::anyhow!("corrupt report: {e}")))?;
    Ok(json_text(text))
}

#[derive(Debug, Deserialize)]
pub struct NewSession {
    pub levelset: String,
    pub level_id: String,
}

#[derive(Debug, Serialize)]
struct SessionCreated {
    session: Uuid,
    #[serde(flatten)]
    frame: Frame,
}

async fn new_session(State(app): State<Shared>, Json(req): Json<NewSession>) -> ApiResult<Response> {
    let set = app
        .store
        .get(&req.levelset)
        .ok_or_else(|| ApiError::not_found(format!("unknown level set {:?}", req.levelset)))?;
    let level = set
        .get(&req.level_id)
        .ok_or_else(|| ApiError::not_found(format!("unknown level {:?}", req.level_id)))?;
    let state = GameState::init(level).map_err(|e| ApiError::internal(e.into()))?;
    let frame = Frame::of(&state);
    let id = Uuid::new_v4();
    let mut sessions = app.sessions.lock().await;
    app.expire(&mut sessions);
    sessions.insert(
        id,
        Session {
            state,
            last_used: Instant::now(),
        },
    );
    Ok((StatusCode::CREATED, Json(SessionCreated { session: id, frame })).into_response())
}

#[derive(Debug, Deserialize)]
pub struct ActionRequest {
    pub action: String,
}

fn parse_session(id: &str) -> ApiResult<Uuid> {
    Uuid::parse_str(id).map_err(|_| ApiError::not_found(format!("unknown session {id:?}")))
}

async fn session_action(
    State(app): State<Shared>,
    UrlPath(id): UrlPath<String>,
    Json(req): Json<ActionRequest>,
) -> ApiResult<Json<Frame>> {
    let id = parse_session(&id)?;
    let mut chars = req.action.chars();
    let action = match (chars.next(), chars.next()) {
        (Some(c), None) => Action::from_code(c.to_ascii_uppercase()),
        _ => None,
    }
    .ok_or_else(|| ApiError::bad_request(format!("invalid action {:?}; expected one of U D L R W", req.action)))?;

    let mut sessions = app.sessions.lock().await;
    app.expire(&mut sessions);
    let session = sessions
        .get_mut(&id)
        .ok_or_else(|| ApiError::not_found(format!("unknown session {id}")))?;
    session.last_used = Instant::now();
    if session.state.outcome().is_terminal() {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            format!("session already ended with outcome {}", session.state.outcome()),
        ));
    }
    session.state = session.state.step(action).map_err(|e| ApiError::internal(e.into()))?;
    Ok(Json(Frame::of(&session.state)))
}

async fn delete_session(State(app): State<Shared>, UrlPath(id): UrlPath<String>) -> ApiResult<StatusCode> {
    let id = parse_session(&id)?;
    let mut sessions = app.sessions.lock().await;
    app.expire(&mut sessions);
    match sessions.remove(&id) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::not_found(format!("unknown session {id}"))),
    }
}

pub fn run_blocking(args: &ServeArgs, store: LevelStore) -> Result<i32> {
    let runtime = tokio::runtime::Runtime::new().context("starting async runtime")?;
    runtime.block_on(async {
        let addr = SocketAddr::from(([127, 0, 0, 1], args.port));
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        eprintln!("listening on http://{addr}");
        let app = router(AppState::new(store, args.out.clone()));
        axum::serve(listener, app).await.context("server failed")?;
        Ok(0)
    })
}
