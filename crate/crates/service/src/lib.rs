//! HTTP front end: scenarios, strategies, runs, explanations and staged
//! problem inspection. Documents live in a content-addressed store on disk.

mod openapi;
pub mod store;

use std::collections::HashMap;
use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use medevac_core::logic::{explain, parse_atom, Interpretation};
use medevac_core::orchestrator::to_json;
use medevac_core::scenario_gen::{generate, GenConfig};
use medevac_core::staging::StagingConfig;
use medevac_core::strategy::{RunMode, RunResult, Strategy};
use medevac_core::triage::Scenario;
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use store::{Kind, Store};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunRequest {
    pub scenario_id: String,
    pub strategy_id: String,
    pub mode: RunMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Queued,
    Done,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunRecord {
    pub id: String,
    #[serde(flatten)]
    pub request: RunRequest,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<RunResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into() }
    }

    fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("unknown {what} {id}"))
    }

    fn unprocessable(message: impl ToString) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message.to_string())
    }
}

impl From<io::Error> for ApiError {
    fn from(e: io::Error) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, format!("store: {e}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        json_response(self.status, to_json(&json!({ "error": self.message })))
    }
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

type ApiResult = Result<Response, ApiError>;

pub struct AppState {
    pub store: Store,
    /// Deduced interpretations of finished runs, for /explain. Rebuilt on
    /// demand after a restart since runs are deterministic.
    interpretations: Mutex<HashMap<String, Arc<Interpretation>>>,
}

impl AppState {
    pub fn new(store: Store) -> Arc<Self> {
        Arc::new(AppState { store, interpretations: Mutex::new(HashMap::new()) })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/spec", get(|| async { json_response(StatusCode::OK, to_json(&openapi::document())) }))
        .route("/scenarios", post(create_scenario))
        .route("/scenarios/{id}", get(get_scenario))
        .route("/strategies", post(create_strategy))
        .route("/strategies/{id}", get(get_strategy))
        .route("/strategies/{id}/facts", get(strategy_facts))
        .route("/runs", post(create_run))
        .route("/runs/{id}", get(get_run))
        .route("/runs/{id}/outcome", get(run_outcome))
        .route("/runs/{id}/explain", get(run_explain))
        .route("/runs/{id}/problems", get(run_problems))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, data_dir: PathBuf) -> io::Result<()> {
    let state = AppState::new(Store::open(data_dir)?);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}

fn parse_json<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| {
        if e.is_syntax() || e.is_eof() {
            ApiError::new(StatusCode::BAD_REQUEST, format!("malformed JSON: {e}"))
        } else {
            ApiError::unprocessable(e)
        }
    })
}

fn created(id: &str) -> Response {
    json_response(StatusCode::CREATED, to_json(&json!({ "id": id })))
}

/// Accepts a full scenario (recognized by its `casualties` key) or a
/// generator config.
async fn create_scenario(State(st): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let value: serde_json::Value = parse_json(&body)?;
    let scenario: Scenario = if value.get("casualties").is_some() {
        let s: Scenario = serde_json::from_value(value).map_err(ApiError::unprocessable)?;
        s.validate().map_err(ApiError::unprocessable)?;
        s
    } else {
        let cfg: GenConfig = serde_json::from_value(value).map_err(ApiError::unprocessable)?;
        generate(&cfg).map_err(ApiError::unprocessable)?
    };
    Ok(created(&st.store.put(Kind::Scenario, &scenario)?))
}

fn stored(st: &AppState, kind: Kind, what: &str, id: &str) -> ApiResult {
    let text = st.store.get_text(kind, id)?.ok_or_else(|| ApiError::not_found(what, id))?;
    Ok(json_response(StatusCode::OK, text))
}

async fn get_scenario(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    stored(&st, Kind::Scenario, "scenario", &id)
}

async fn create_strategy(State(st): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let strategy: Strategy = parse_json(&body)?;
    strategy.validate().map_err(ApiError::unprocessable)?;
    Ok(created(&st.store.put(Kind::Strategy, &strategy)?))
}

async fn get_strategy(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    stored(&st, Kind::Strategy, "strategy", &id)
}

fn load<T: for<'de> Deserialize<'de>>(st: &AppState, kind: Kind, what: &str, id: &str) -> Result<T, ApiError> {
    st.store.get(kind, id)?.ok_or_else(|| ApiError::not_found(what, id))
}

async fn strategy_facts(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let strategy: Strategy = load(&st, Kind::Strategy, "strategy", &id)?;
    let facts: Vec<String> = strategy.compile_facts().iter().map(ToString::to_string).collect();
    Ok(json_response(StatusCode::OK, to_json(&json!({ "facts": facts }))))
}

/// Run ids address the request, so posting the same request twice returns
/// the existing run.
async fn create_run(State(st): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let request: RunRequest = parse_json(&body)?;
    let scenario: Scenario = load(&st, Kind::Scenario, "scenario", &request.scenario_id)?;
    let strategy: Strategy = load(&st, Kind::Strategy, "strategy", &request.strategy_id)?;
    let id = store::content_id(to_json(&request).as_bytes());
    if let Some(existing) = st.store.get_text(Kind::Run, &id)? {
        return Ok(json_response(StatusCode::OK, existing));
    }
    let record = RunRecord { id: id.clone(), request, status: RunStatus::Queued, result: None, error: None };
    st.store.put_at(Kind::Run, &id, &record)?;
    let response = json_response(StatusCode::ACCEPTED, to_json(&record));
    tokio::spawn(execute(st, record, scenario, strategy));
    Ok(response)
}

async fn execute(st: Arc<AppState>, mut record: RunRecord, scenario: Scenario, strategy: Strategy) {
    let mode = record.request.mode;
    let outcome = tokio::task::spawn_blocking(move || strategy.execute(&scenario, mode, StagingConfig::default())).await;
    match outcome {
        Ok(Ok(artifacts)) => {
            if let Some(interp) = artifacts.interpretation {
                st.interpretations.lock().expect("cache lock").insert(record.id.clone(), Arc::new(interp));
            }
            // Problems first, so a run reported done always has them.
            let stored = st.store.put_at(Kind::Problems, &record.id, &artifacts.problems);
            match stored {
                Ok(()) => {
                    record.status = RunStatus::Done;
                    record.result = Some(artifacts.result);
                }
                Err(e) => {
                    record.status = RunStatus::Failed;
                    record.error = Some(format!("store: {e}"));
                }
            }
        }
        Ok(Err(e)) => {
            record.status = RunStatus::Failed;
            record.error = Some(e.to_string());
        }
        Err(e) => {
            record.status = RunStatus::Failed;
            record.error = Some(format!("run aborted: {e}"));
        }
    }
    if let Err(e) = st.store.put_at(Kind::Run, &record.id, &record) {
        eprintln!("run {}: could not store result: {e}", record.id);
    }
}

async fn get_run(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    stored(&st, Kind::Run, "run", &id)
}

fn finished(st: &AppState, id: &str) -> Result<(RunRecord, RunResult), ApiError> {
    let record: RunRecord = load(st, Kind::Run, "run", id)?;
    match (&record.status, record.result.clone()) {
        (RunStatus::Done, Some(result)) => Ok((record, result)),
        (RunStatus::Failed, _) => Err(ApiError::new(
            StatusCode::CONFLICT,
            format!("run {id} failed: {}", record.error.as_deref().unwrap_or("unknown error")),
        )),
        _ => Err(ApiError::new(StatusCode::CONFLICT, format!("run {id} is not finished"))),
    }
}

/// Outcome facts of every solved problem, in the same JSON the CLI prints.
async fn run_outcome(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let (_, result) = finished(&st, &id)?;
    Ok(json_response(StatusCode::OK, to_json(&result.outcome_facts())))
}

async fn run_problems(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    finished(&st, &id)?;
    stored(&st, Kind::Problems, "run", &id)
}

#[derive(Deserialize)]
struct ExplainQuery {
    atom: String,
}

async fn run_explain(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<ExplainQuery>,
) -> ApiResult {
    let (record, _) = finished(&st, &id)?;
    let atom = parse_atom(&q.atom)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?
        .to_ground()
        .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, format!("{} is not ground", q.atom)))?;
    let interp = interpretation(&st, &record).await?;
    let tree = explain(&interp, &atom).map_err(|e| ApiError::new(StatusCode::NOT_FOUND, e.to_string()))?;
    Ok(json_response(StatusCode::OK, to_json(&json!({ "atom": atom.to_string(), "trace": tree.to_string(), "tree": tree }))))
}

async fn interpretation(st: &Arc<AppState>, record: &RunRecord) -> Result<Arc<Interpretation>, ApiError> {
    if let Some(i) = st.interpretations.lock().expect("cache lock").get(&record.id) {
        return Ok(i.clone());
    }
    if !matches!(record.request.mode, RunMode::Single | RunMode::Multi) {
        return Err(ApiError::new(StatusCode::CONFLICT, "only single and multi runs keep an interpretation"));
    }
    let scenario: Scenario = load(st, Kind::Scenario, "scenario", &record.request.scenario_id)?;
    let strategy: Strategy = load(st, Kind::Strategy, "strategy", &record.request.strategy_id)?;
    let mode = record.request.mode;
    let artifacts = tokio::task::spawn_blocking(move || strategy.execute(&scenario, mode, StagingConfig::default()))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    let interp = Arc::new(artifacts.interpretation.expect("single and multi runs keep their interpretation"));
    st.interpretations.lock().expect("cache lock").insert(record.id.clone(), interp.clone());
    Ok(interp)
}

