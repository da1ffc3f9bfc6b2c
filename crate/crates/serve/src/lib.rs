//! Read-only JSON service over one immutable model and player registry.
//!
//! Every request carries its own seed, so responses depend only on the
//! request body and the loaded checkpoint.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use courtvec_core::analysis::{nearest_neighbors, Matrix};
use courtvec_core::checkpoint::encode;
use courtvec_core::lineup_opt::{rank_fifth_man, FifthManQuery, FifthManRow};
use courtvec_core::outcome::{outcome_points, OUTCOME_COUNT, OUTCOME_LABELS};
use courtvec_core::sim::{simulate_series, Lineup, SeriesResult, DEFAULT_POSSESSIONS, DEFAULT_SIMS};
use courtvec_core::{EmbeddingModel, Error, PlayerRegistry};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const API_PREFIX: &str = "/api/v1";
pub const DEFAULT_NEIGHBORS: usize = 5;

pub struct ServiceState {
    model: EmbeddingModel,
    registry: PlayerRegistry,
    embeddings: Matrix,
    checkpoint_sha256: String,
}

impl ServiceState {
    pub fn new(model: EmbeddingModel, registry: PlayerRegistry) -> courtvec_core::Result<Self> {
        let vocab = model.config().vocab;
        if vocab != registry.len() {
            return Err(Error::Value(format!(
                "model has {vocab} players but the registry has {}",
                registry.len()
            )));
        }
        let digest = Sha256::digest(encode(&model));
        let mut checkpoint_sha256 = String::with_capacity(64);
        for b in digest.iter() {
            write!(checkpoint_sha256, "{b:02x}").unwrap();
        }
        Ok(ServiceState {
            embeddings: Matrix::embeddings(&model),
            model,
            registry,
            checkpoint_sha256,
        })
    }

    pub fn model(&self) -> &EmbeddingModel {
        &self.model
    }

    pub fn registry(&self) -> &PlayerRegistry {
        &self.registry
    }

    pub fn checkpoint_sha256(&self) -> &str {
        &self.checkpoint_sha256
    }

    fn check_known(&self, ids: &[u32]) -> Result<(), ApiError> {
        match ids.iter().find(|&&id| !self.registry.contains(id)) {
            Some(&id) => Err(Error::UnknownPlayer(id).into()),
            None => Ok(()),
        }
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    detail: Value,
}

impl ApiError {
    fn bad_request(message: String) -> Self {
        ApiError { status: StatusCode::BAD_REQUEST, code: "malformed_request", message, detail: Value::Null }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let (status, code, detail) = match &e {
            Error::UnknownPlayer(id) => (StatusCode::NOT_FOUND, "unknown_player", json!({ "id": id })),
            Error::Lineup(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_lineup", Value::Null),
            Error::Argument(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_argument", Value::Null),
            Error::DegenerateModel { overtimes } => (
                StatusCode::UNPROCESSABLE_ENTITY,
                "degenerate_model",
                json!({ "overtimes": overtimes }),
            ),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal", Value::Null),
        };
        ApiError { status, code, message, detail }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "code": self.code, "message": self.message, "detail": self.detail });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

// Bodies are decoded by hand so that every malformed request gets the JSON
// error shape rather than the framework's plain-text rejection.
fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

async fn blocking<T: Send + 'static>(
    work: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(work).await.map_err(|e| ApiError {
        status: StatusCode::INTERNAL_SERVER_ERROR,
        code: "internal",
        message: e.to_string(),
        detail: Value::Null,
    })?
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictRequest {
    pub offense: Vec<u32>,
    pub defense: Vec<u32>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct LabeledProbability {
    pub class: usize,
    pub label: String,
    pub probability: f64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct PredictResponse {
    pub offense: Vec<u32>,
    pub defense: Vec<u32>,
    pub outcomes: Vec<LabeledProbability>,
}

pub fn predict(state: &ServiceState, req: &PredictRequest) -> Result<PredictResponse, ApiError> {
    state.check_known(&req.offense)?;
    state.check_known(&req.defense)?;
    let q = state.model.forward(&req.offense, &req.defense)?;
    let mut offense = req.offense.clone();
    let mut defense = req.defense.clone();
    offense.sort_unstable();
    defense.sort_unstable();
    let outcomes = (0..OUTCOME_COUNT)
        .map(|k| LabeledProbability { class: k, label: OUTCOME_LABELS[k].to_string(), probability: q[k] })
        .collect();
    Ok(PredictResponse { offense, defense, outcomes })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateRequest {
    pub lineup_a: Vec<u32>,
    pub lineup_b: Vec<u32>,
    #[serde(default = "default_sims")]
    pub sims: usize,
    #[serde(default = "default_possessions")]
    pub possessions: usize,
    pub seed: u64,
}

fn default_sims() -> usize {
    DEFAULT_SIMS
}

fn default_possessions() -> usize {
    DEFAULT_POSSESSIONS
}

pub fn simulate(state: &ServiceState, req: &SimulateRequest) -> Result<SeriesResult, ApiError> {
    state.check_known(&req.lineup_a)?;
    state.check_known(&req.lineup_b)?;
    let a = Lineup::new(&req.lineup_a)?;
    let b = Lineup::new(&req.lineup_b)?;
    Ok(simulate_series(&state.model, &a, &b, req.sims, req.possessions, req.seed)?)
}

#[derive(Debug, Serialize)]
pub struct OptimizeResponse {
    pub rows: Vec<FifthManRow>,
}

pub fn optimize(state: &ServiceState, query: &FifthManQuery) -> Result<OptimizeResponse, ApiError> {
    state.check_known(&query.fixed_four)?;
    state.check_known(&query.opponent)?;
    state.check_known(&query.candidates)?;
    Ok(OptimizeResponse { rows: rank_fifth_man(&state.model, query)? })
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct NeighborEntry {
    pub id: u32,
    pub name: String,
    pub distance: f64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct NeighborsResponse {
    pub player: u32,
    pub neighbors: Vec<NeighborEntry>,
}

pub fn neighbors(state: &ServiceState, player: u32, count: usize) -> Result<NeighborsResponse, ApiError> {
    state.check_known(&[player])?;
    let found = nearest_neighbors(&state.embeddings, player, count)?;
    let neighbors = found
        .into_iter()
        .map(|n| NeighborEntry {
            id: n.id,
            name: state.registry.get(n.id).map(|p| p.name.clone()).unwrap_or_default(),
            distance: n.distance,
        })
        .collect();
    Ok(NeighborsResponse { player, neighbors })
}

async fn predict_handler(State(state): State<Arc<ServiceState>>, body: Bytes) -> ApiResult<PredictResponse> {
    let req: PredictRequest = parse_body(&body)?;
    predict(&state, &req).map(Json)
}

async fn simulate_handler(State(state): State<Arc<ServiceState>>, body: Bytes) -> ApiResult<SeriesResult> {
    let req: SimulateRequest = parse_body(&body)?;
    blocking(move || simulate(&state, &req)).await.map(Json)
}

async fn optimize_handler(State(state): State<Arc<ServiceState>>, body: Bytes) -> ApiResult<OptimizeResponse> {
    let query: FifthManQuery = parse_body(&body)?;
    blocking(move || optimize(&state, &query)).await.map(Json)
}

async fn players_handler(State(state): State<Arc<ServiceState>>) -> Json<Value> {
    Json(json!({ "players": state.registry.players() }))
}

async fn neighbors_handler(
    State(state): State<Arc<ServiceState>>,
    Path(id): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<NeighborsResponse> {
    let player: u32 = id
        .parse()
        .map_err(|_| ApiError::bad_request(format!("player id {id:?} is not a non-negative integer")))?;
    let count = match params.get("count") {
        Some(raw) => raw
            .parse()
            .map_err(|_| ApiError::bad_request(format!("count {raw:?} is not a non-negative integer")))?,
        None => DEFAULT_NEIGHBORS,
    };
    neighbors(&state, player, count).map(Json)
}

async fn meta_handler(State(state): State<Arc<ServiceState>>) -> Json<Value> {
    let c = state.model.config();
    let labels: Vec<Value> = (0..OUTCOME_COUNT)
        .map(|k| json!({ "class": k, "label": OUTCOME_LABELS[k], "points": outcome_points(k).unwrap() }))
        .collect();
    Json(json!({
        "version": env!("CARGO_PKG_VERSION"),
        "vocab": c.vocab,
        "embed_dim": c.embed_dim,
        "per_side": c.per_side,
        "hidden": c.hidden,
        "outcomes": c.outcomes,
        "checkpoint_sha256": state.checkpoint_sha256,
        "labels": labels,
    }))
}

async fn not_found() -> ApiError {
    ApiError { status: StatusCode::NOT_FOUND, code: "not_found", message: "no such endpoint".into(), detail: Value::Null }
}

pub fn router(state: Arc<ServiceState>) -> Router {
    let api = Router::new()
        .route("/predict", post(predict_handler))
        .route("/simulate/series", post(simulate_handler))
        .route("/optimize/fifth", post(optimize_handler))
        .route("/players", get(players_handler))
        .route("/players/{id}/neighbors", get(neighbors_handler))
        .route("/meta", get(meta_handler));
    Router::new().nest(API_PREFIX, api).fallback(not_found).with_state(state)
}

/// Serves until the process is stopped.
pub async fn serve(state: Arc<ServiceState>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}
