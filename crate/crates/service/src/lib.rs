//! HTTP/JSON sessions over the solver.
//!
//! | method | path                        | purpose                              |
//! |--------|-----------------------------|--------------------------------------|
//! | POST   | `/api/sessions`             | create from instance JSON or CSV     |
//! | GET    | `/api/sessions/{id}`        | instance layout, baseline, history   |
//! | POST   | `/api/sessions/{id}/solve`  | optimise and store as baseline       |
//! | POST   | `/api/sessions/{id}/whatif` | re-solve under a delta, diff         |
//! | GET    | `/healthz`                  | liveness                             |
//!
//! Solves block the request until the backend answers or times out. A
//! session runs at most one solve at a time; an overlapping request gets 409.

pub mod error;
pub mod view;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use copath_core::graph::check_walk;
use copath_core::io::csv::{parse_bundle, CsvBundle};
use copath_core::model::{Instance, Solution};
use copath_core::scoring::SeverityMap;
use copath_core::solver::{solve_with, BackendConfig, Strategy};
use copath_core::validate::validate_instance;
use copath_core::whatif::{resolve, WhatIfDelta};

pub use error::ApiError;
use view::{graph_views, GraphView, HistoryEntry, SolutionView, WhatIfResponse};

pub const SNAPSHOT_FILE: &str = "sessions.json";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub backend: BackendConfig,
    /// Sessions are restored from and saved to this directory when set.
    pub data_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            backend: BackendConfig::from_env(),
            data_dir: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub instance: Instance,
    pub baseline: Option<Solution>,
    pub baseline_view: Option<SolutionView>,
    pub history: Vec<HistoryEntry>,
}

struct Slot {
    session: Mutex<Session>,
    busy: AtomicBool,
}

/// Clears the busy flag when the solve finishes or its task is dropped.
struct BusyGuard(Arc<Slot>);

impl Drop for BusyGuard {
    fn drop(&mut self) {
        self.0.busy.store(false, Ordering::Release);
    }
}

pub struct AppState {
    config: ServiceConfig,
    sessions: RwLock<HashMap<String, Arc<Slot>>>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        Self {
            config,
            sessions: RwLock::new(HashMap::new()),
        }
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    fn insert(&self, session: Session) {
        let slot = Arc::new(Slot {
            session: Mutex::new(session),
            busy: AtomicBool::new(false),
        });
        let id = slot.session.lock().expect("fresh mutex").id.clone();
        self.sessions.write().expect("session map poisoned").insert(id, slot);
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }

    fn claim(&self, id: &str) -> Result<BusyGuard, ApiError> {
        let slot = self.slot(id)?;
        if slot.busy.compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire).is_err() {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "solve_in_progress",
                format!("session {id} is already solving"),
            ));
        }
        Ok(BusyGuard(slot))
    }

    pub fn sessions(&self) -> Vec<Session> {
        let map = self.sessions.read().expect("session map poisoned");
        let mut out: Vec<Session> = map.values().map(|s| s.session.lock().expect("session poisoned").clone()).collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }

    pub fn save_snapshot(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let text = serde_json::to_string_pretty(&self.sessions()).map_err(std::io::Error::other)?;
        std::fs::write(dir.join(SNAPSHOT_FILE), text)
    }

    /// Restores sessions saved by [`AppState::save_snapshot`]; a missing file
    /// is not an error. Returns the number of sessions loaded.
    pub fn load_snapshot(&self, dir: &Path) -> std::io::Result<usize> {
        let path = dir.join(SNAPSHOT_FILE);
        if !path.exists() {
            return Ok(0);
        }
        let sessions: Vec<Session> =
            serde_json::from_str(&std::fs::read_to_string(path)?).map_err(std::io::Error::other)?;
        let n = sessions.len();
        for s in sessions {
            self.insert(s);
        }
        Ok(n)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_state))
        .route("/api/sessions/{id}/solve", post(solve_session))
        .route("/api/sessions/{id}/whatif", post(whatif_session))
        .with_state(state)
}

async fn healthz() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

#[derive(Deserialize)]
struct CsvUpload {
    csv: CsvBundle,
    #[serde(default)]
    severities: SeverityMap,
}

fn parse_json(body: &Bytes) -> Result<Option<Value>, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(None);
    }
    serde_json::from_slice(body)
        .map(Some)
        .map_err(|e| ApiError::bad_request(format!("body is not JSON: {e}")))
}

fn instance_from_body(body: &Bytes) -> Result<Instance, ApiError> {
    let value = parse_json(body)?.ok_or_else(|| ApiError::bad_request("empty body"))?;
    if value.get("csv").is_some() {
        let upload: CsvUpload =
            serde_json::from_value(value).map_err(|e| ApiError::bad_request(format!("bad CSV upload: {e}")))?;
        return Ok(parse_bundle(&upload.csv, &upload.severities)?);
    }
    let instance: Instance =
        serde_json::from_value(value).map_err(|e| ApiError::bad_request(format!("bad instance: {e}")))?;
    let report = validate_instance(&instance);
    if !report.is_ok() {
        return Err(ApiError::invalid_instance(&report));
    }
    Ok(instance)
}

async fn create_session(State(state): State<Arc<AppState>>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let instance = instance_from_body(&body)?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    state.insert(Session {
        id: id.clone(),
        instance,
        baseline: None,
        baseline_view: None,
        history: Vec::new(),
    });
    Ok((StatusCode::CREATED, Json(json!({ "session_id": id }))))
}

#[derive(Serialize)]
struct StateResponse {
    session_id: String,
    instance: Instance,
    graphs: Vec<GraphView>,
    baseline: Option<SolutionView>,
    history: Vec<HistoryEntry>,
}

async fn get_state(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<StateResponse>, ApiError> {
    let slot = state.slot(&id)?;
    let s = slot.session.lock().expect("session poisoned");
    Ok(Json(StateResponse {
        session_id: s.id.clone(),
        graphs: graph_views(&s.instance),
        instance: s.instance.clone(),
        baseline: s.baseline_view.clone(),
        history: s.history.clone(),
    }))
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct SolveRequest {
    strategy: Option<String>,
    /// Seconds.
    timeout: Option<f64>,
}

fn backend_for(base: &BackendConfig, timeout: Option<f64>) -> Result<BackendConfig, ApiError> {
    match timeout {
        None => Ok(base.clone()),
        Some(t) if t.is_finite() && t > 0.0 => Ok(base.clone().with_timeout(Duration::from_secs_f64(t))),
        Some(t) => Err(ApiError::bad_request(format!("timeout must be a positive number of seconds, got {t}"))),
    }
}

fn checked(instance: &Instance, solution: &Solution) {
    if cfg!(debug_assertions) {
        let report = check_walk(instance, solution);
        assert!(report.is_ok(), "solver returned a non-walk: {:?}", report.violations);
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))
}

async fn solve_session(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Json<SolutionView>, ApiError> {
    let request: SolveRequest = match parse_json(&body)? {
        None => SolveRequest::default(),
        Some(v) => serde_json::from_value(v).map_err(|e| ApiError::bad_request(format!("bad solve request: {e}")))?,
    };
    let backend = backend_for(&state.config.backend, request.timeout)?;
    let strategy = match request.strategy.as_deref() {
        Some(s) => s.parse::<Strategy>().map_err(ApiError::bad_request)?,
        None if backend.supports_maximize => Strategy::Native,
        None => Strategy::Iterative,
    };
    let guard = state.claim(&id)?;
    let instance = guard.0.session.lock().expect("session poisoned").instance.clone();
    let solved = blocking(move || {
        let report = solve_with(&backend, &instance, strategy)?;
        checked(&instance, &report.solution);
        let view = SolutionView::new(&instance, &report.solution);
        Ok::<_, ApiError>((report.solution, view))
    })
    .await??;
    let (solution, view) = solved;
    let mut s = guard.0.session.lock().expect("session poisoned");
    s.baseline = Some(solution);
    s.baseline_view = Some(view.clone());
    Ok(Json(view))
}

async fn whatif_session(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Json<WhatIfResponse>, ApiError> {
    let delta: WhatIfDelta = match parse_json(&body)? {
        None => WhatIfDelta::default(),
        Some(v) => serde_json::from_value(v).map_err(|e| ApiError::bad_request(format!("bad delta: {e}")))?,
    };
    let guard = state.claim(&id)?;
    let (instance, baseline) = {
        let s = guard.0.session.lock().expect("session poisoned");
        let baseline = s.baseline.clone().ok_or_else(|| {
            ApiError::new(StatusCode::CONFLICT, "no_baseline", format!("session {id} has not been solved yet"))
        })?;
        (s.instance.clone(), baseline)
    };
    let backend = state.config.backend.clone();
    let applied = delta.clone();
    let (solution, diff, view) = blocking(move || {
        let (solution, diff) = resolve(&backend, &instance, &applied, Some(&baseline))?;
        checked(&copath_core::whatif::apply_delta(&instance, &applied)?, &solution);
        let view = SolutionView::new(&instance, &solution);
        Ok::<_, ApiError>((solution, diff, view))
    })
    .await??;
    let mut s = guard.0.session.lock().expect("session poisoned");
    s.history.push(HistoryEntry {
        delta,
        solution: view.clone(),
        diff: diff.clone(),
    });
    s.baseline = Some(solution);
    s.baseline_view = Some(view.clone());
    Ok(Json(WhatIfResponse { solution: view, diff }))
}

/// Serves until Ctrl-C, restoring and saving the session snapshot when a
/// data directory is configured.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let state = Arc::new(AppState::new(config));
    if let Some(dir) = &state.config.data_dir {
        let n = state.load_snapshot(dir)?;
        if n > 0 {
            eprintln!("restored {n} sessions from {}", dir.display());
        }
    }
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    if let Some(dir) = &state.config.data_dir {
        state.save_snapshot(dir)?;
    }
    Ok(())
}
