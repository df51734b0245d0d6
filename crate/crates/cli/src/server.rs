//! JSON over HTTP: outcomes, atlas, derivations, values and games.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use domineering::cgt::{render_value, value};
use domineering::knowledge::{atlas, explain, AtlasCell, Horizon};
use domineering::strategy::{PlaySession, SessionStatus, StrategyError};
use domineering::{BoardError, BoardSpec, Cell, Move, Player, Position, Topology, ValueLimits};

use crate::engine::Engine;

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
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Json(json!({ "error": self.message }));
        if self.status == StatusCode::SERVICE_UNAVAILABLE {
            (self.status, [(header::RETRY_AFTER, "5")], body).into_response()
        } else {
            (self.status, body).into_response()
        }
    }
}

impl From<BoardError> for ApiError {
    fn from(e: BoardError) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, e.to_string())
    }
}

impl From<StrategyError> for ApiError {
    fn from(e: StrategyError) -> Self {
        let status = match &e {
            StrategyError::Illegal(_) | StrategyError::Board(_) => StatusCode::BAD_REQUEST,
            StrategyError::OutOfTurn { .. } | StrategyError::GameOver => StatusCode::CONFLICT,
            StrategyError::Exhausted(_) => StatusCode::SERVICE_UNAVAILABLE,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError::new(status, e.to_string())
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// A saved game: enough to replay it after a restart.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct SavedSession {
    spec: BoardSpec,
    engine: Player,
    first: Player,
    moves: Vec<Move>,
}

type Slot = Arc<tokio::sync::Mutex<PlaySession>>;

pub struct AppState {
    engine: Arc<Engine>,
    sessions: parking_lot::Mutex<BTreeMap<u64, Slot>>,
    next_id: parking_lot::Mutex<u64>,
    sidecar: Option<PathBuf>,
    budget: Duration,
}

impl AppState {
    /// `sidecar` keeps sessions across restarts; `budget` bounds each
    /// engine move and value request.
    pub fn new(engine: Arc<Engine>, sidecar: Option<PathBuf>, budget: Duration) -> anyhow::Result<Self> {
        let state = AppState {
            engine,
            sessions: Default::default(),
            next_id: parking_lot::Mutex::new(1),
            sidecar,
            budget,
        };
        state.restore()?;
        Ok(state)
    }

    fn restore(&self) -> anyhow::Result<()> {
        let Some(path) = &self.sidecar else { return Ok(()) };
        if !path.exists() {
            return Ok(());
        }
        let saved: BTreeMap<u64, SavedSession> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let mut sessions = self.sessions.lock();
        for (id, s) in saved {
            let strategy = self.engine.strategy(s.spec)?;
            let game = PlaySession::replay(strategy, s.engine, s.first, &s.moves)?;
            sessions.insert(id, Arc::new(tokio::sync::Mutex::new(game)));
            let mut next = self.next_id.lock();
            *next = (*next).max(id + 1);
        }
        Ok(())
    }

    async fn persist(&self) -> Result<(), ApiError> {
        let Some(path) = &self.sidecar else { return Ok(()) };
        let slots: Vec<(u64, Slot)> = self.sessions.lock().iter().map(|(k, v)| (*k, v.clone())).collect();
        let mut saved = BTreeMap::new();
        for (id, slot) in slots {
            let g = slot.lock().await;
            saved.insert(
                id,
                SavedSession {
                    spec: g.spec(),
                    engine: g.engine(),
                    first: g.first(),
                    moves: g.moves().to_vec(),
                },
            );
        }
        let text = serde_json::to_string_pretty(&saved).expect("sessions serialize");
        std::fs::write(path, text)
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, format!("saving sessions: {e}")))
    }

    fn slot(&self, id: u64) -> Result<Slot, ApiError> {
        self.sessions
            .lock()
            .get(&id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session {id}")))
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/outcome", get(outcome))
        .route("/atlas", get(atlas_grid))
        .route("/derivation", get(derivation))
        .route("/value", get(value_of))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/moves", post(post_move))
        .route("/sessions/{id}/engine-move", post(engine_move))
        .with_state(state)
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

#[derive(Deserialize)]
struct KeyQuery {
    topology: Option<Topology>,
    width: u16,
    length: u16,
}

impl KeyQuery {
    fn spec(&self) -> Result<BoardSpec, ApiError> {
        Ok(BoardSpec::new(
            self.topology.unwrap_or(Topology::Rectangle),
            self.width,
            self.length,
        )?)
    }
}

async fn outcome(State(st): State<Arc<AppState>>, Query(q): Query<KeyQuery>) -> ApiResult<AtlasCell> {
    let key = q.spec()?;
    if !st.engine.kb.is_known(&key) {
        return Err(ApiError::new(StatusCode::NOT_FOUND, format!("nothing is known about {key}")));
    }
    Ok(Json(AtlasCell::of(st.engine.kb, key)))
}

#[derive(Deserialize)]
struct AtlasQuery {
    topology: Option<Topology>,
    max_width: Option<u16>,
    max_length: Option<u16>,
}

async fn atlas_grid(
    State(st): State<Arc<AppState>>,
    Query(q): Query<AtlasQuery>,
) -> ApiResult<domineering::knowledge::Atlas> {
    let h = Horizon::default();
    let w = q.max_width.unwrap_or(h.max_width).clamp(1, h.max_width);
    let l = q.max_length.unwrap_or(h.max_length).clamp(1, h.max_length);
    Ok(Json(atlas(st.engine.kb, q.topology.unwrap_or(Topology::Rectangle), w, l)))
}

async fn derivation(
    State(st): State<Arc<AppState>>,
    Query(q): Query<KeyQuery>,
) -> ApiResult<domineering::knowledge::TraceNode> {
    let key = q.spec()?;
    explain(st.engine.kb, &key)
        .map(Json)
        .map_err(|e| ApiError::new(StatusCode::NOT_FOUND, e.to_string()))
}

async fn value_of(State(st): State<Arc<AppState>>, Query(q): Query<KeyQuery>) -> ApiResult<serde_json::Value> {
    let spec = q.spec()?;
    let pos = Position::empty(spec).map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    let limits = ValueLimits {
        max_time: st.budget,
        ..ValueLimits::default()
    };
    let g = tokio::task::spawn_blocking(move || value(&pos, limits))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(|e| ApiError::new(StatusCode::SERVICE_UNAVAILABLE, e.to_string()))?;
    Ok(Json(json!({ "spec": spec, "value": render_value(g) })))
}

#[derive(Serialize)]
pub struct SessionRecord {
    id: u64,
    spec: BoardSpec,
    engine: String,
    first: String,
    to_move: String,
    status: &'static str,
    winner: Option<String>,
    moves: Vec<String>,
    recipe: String,
    board: Vec<String>,
    transcript: String,
}

fn record(id: u64, g: &PlaySession) -> SessionRecord {
    let (status, winner) = match g.status() {
        SessionStatus::InProgress => ("in_progress", None),
        SessionStatus::Finished(p) => ("finished", Some(p.to_string())),
    };
    SessionRecord {
        id,
        spec: g.spec(),
        engine: g.engine().to_string(),
        first: g.first().to_string(),
        to_move: g.to_move().to_string(),
        status,
        winner,
        moves: g.moves().iter().map(Move::to_string).collect(),
        recipe: g.recipe(),
        board: g.grid().to_string().lines().map(str::to_string).collect(),
        transcript: g.transcript().to_string(),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SpecInput {
    Text(String),
    Spec(BoardSpec),
}

#[derive(Deserialize)]
struct NewSession {
    spec: SpecInput,
    /// `V`, `H` or `auto`.
    engine_side: Option<String>,
    /// Who moves first; Vera unless given.
    first: Option<String>,
}

fn player(text: &str) -> Result<Player, ApiError> {
    Ok(text.parse::<Player>()?)
}

async fn create_session(
    State(st): State<Arc<AppState>>,
    Json(req): Json<NewSession>,
) -> Result<(StatusCode, Json<SessionRecord>), ApiError> {
    let spec = match req.spec {
        SpecInput::Text(t) => t.parse::<BoardSpec>()?,
        SpecInput::Spec(s) => BoardSpec::new(s.topology, s.width, s.length)?,
    };
    let engine = match req.engine_side.as_deref() {
        None | Some("auto") => None,
        Some(p) => Some(player(p)?),
    };
    let first = req.first.as_deref().map(player).transpose()?.unwrap_or(Player::Vertical);
    let st2 = st.clone();
    let game = tokio::task::spawn_blocking(move || st2.engine.session(spec, engine, first))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let id = {
        let mut next = st.next_id.lock();
        let id = *next;
        *next += 1;
        id
    };
    let rec = record(id, &game);
    st.sessions.lock().insert(id, Arc::new(tokio::sync::Mutex::new(game)));
    st.persist().await?;
    Ok((StatusCode::CREATED, Json(rec)))
}

async fn get_session(State(st): State<Arc<AppState>>, Path(id): Path<u64>) -> ApiResult<SessionRecord> {
    let slot = st.slot(id)?;
    let g = slot.lock().await;
    Ok(Json(record(id, &g)))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CellInput {
    Name(String),
    Cell(Cell),
}

impl CellInput {
    fn cell(&self) -> Result<Cell, ApiError> {
        match self {
            CellInput::Name(s) => Ok(s.parse()?),
            CellInput::Cell(c) => Ok(*c),
        }
    }
}

#[derive(Deserialize)]
struct MoveRequest {
    player: String,
    cells: [CellInput; 2],
}

async fn post_move(
    State(st): State<Arc<AppState>>,
    Path(id): Path<u64>,
    Json(req): Json<MoveRequest>,
) -> ApiResult<SessionRecord> {
    let slot = st.slot(id)?;
    let rec = {
        let mut g = slot.lock().await;
        let mv = Move::new(player(&req.player)?, req.cells[0].cell()?, req.cells[1].cell()?);
        g.play(mv)?;
        record(id, &g)
    };
    st.persist().await?;
    Ok(Json(rec))
}

async fn engine_move(State(st): State<Arc<AppState>>, Path(id): Path<u64>) -> ApiResult<SessionRecord> {
    let slot = st.slot(id)?;
    let rec = {
        let mut g = slot.lock().await;
        let mut trial = g.clone();
        let work = tokio::task::spawn_blocking(move || trial.engine_move().map(|_| trial));
        match tokio::time::timeout(st.budget, work).await {
            Err(_) => {
                return Err(ApiError::new(
                    StatusCode::SERVICE_UNAVAILABLE,
                    format!("no certified move within {:?}; try again", st.budget),
                ))
            }
            Ok(joined) => {
                *g = joined.map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
            }
        }
        record(id, &g)
    };
    st.persist().await?;
    Ok(Json(rec))
}
