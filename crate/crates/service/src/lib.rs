//! HTTP/JSON service for assisted play: live games held in memory, solver
//! hints computed from the visible board only, and one-move delegation to
//! any solver version.
//!
//! | method | path | body / query |
//! |---|---|---|
//! | POST | `/games` | `{p, q, n, seed?, version?}` |
//! | GET | `/games/{id}` | |
//! | POST | `/games/{id}/uncover` | `{i, j}` |
//! | POST | `/games/{id}/flag` | `{i, j}` (toggles) |
//! | GET | `/games/{id}/hint` | `?version=V` |
//! | POST | `/games/{id}/solver-move` | |
//! | GET | `/versions` | |

pub mod api;
pub mod session;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use minesweep_core::csp::TraversalLimits;
use minesweep_core::engine::{BoardConfig, Coord, GameState};
use minesweep_core::policies::{apply_decision, decide, frontier_report, Models, PolicyContext, VersionId};
use minesweep_core::rng::{derive_seed, rng_from_seed};

pub use api::*;
pub use session::{Session, SessionStore};

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub default_version: VersionId,
    /// Directory holding trained models; learned versions without a model
    /// are reported as not ready.
    pub model_dir: Option<PathBuf>,
    pub idle_timeout: Duration,
    /// Limits of the enumeration behind hint probabilities.
    pub hint_limits: TraversalLimits,
    /// Wall-clock cap on one hint or solver move.
    pub move_timeout: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            default_version: VersionId::V6_5,
            model_dir: None,
            idle_timeout: Duration::from_secs(30 * 60),
            hint_limits: TraversalLimits::dsscsp_capped(),
            move_timeout: Duration::from_secs(2),
        }
    }
}

pub struct AppState {
    pub config: ServiceConfig,
    pub sessions: SessionStore,
    models: HashMap<VersionId, Models>,
    default_version: VersionId,
}

/// Fallback when the configured default version has no model.
const FALLBACK_VERSION: VersionId = VersionId::V4_5;

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        let models: HashMap<VersionId, Models> = VersionId::ALL
            .iter()
            .filter_map(|&v| {
                if !v.is_learned() {
                    return Some((v, Models::default()));
                }
                let dir = config.model_dir.as_ref()?;
                Models::load_for(dir, v).ok().map(|m| (v, m))
            })
            .collect();
        let default_version =
            if models.contains_key(&config.default_version) { config.default_version } else { FALLBACK_VERSION };
        Self { config, sessions: SessionStore::default(), models, default_version }
    }

    pub fn default_version(&self) -> VersionId {
        self.default_version
    }

    pub fn is_ready(&self, v: VersionId) -> bool {
        self.models.contains_key(&v)
    }

    fn models_for(&self, v: VersionId) -> Result<&Models, ApiError> {
        self.models
            .get(&v)
            .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, format!("version {v} has no trained model loaded")))
    }

    fn context(&self, v: VersionId, seed: u64) -> Result<PolicyContext, ApiError> {
        let mut ctx = PolicyContext::new(v, self.models_for(v)?, seed)
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
        ctx.move_timeout = Some(self.config.move_timeout);
        Ok(ctx)
    }
}

type Shared = Arc<AppState>;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/games", post(create_game))
        .route("/games/{id}", get(get_game))
        .route("/games/{id}/uncover", post(uncover))
        .route("/games/{id}/flag", post(flag))
        .route("/games/{id}/hint", get(hint))
        .route("/games/{id}/solver-move", post(solver_move))
        .route("/versions", get(versions))
        .with_state(state)
}

/// Periodically evicts idle sessions.
pub fn spawn_evictor(state: Shared, every: Duration) -> tokio::task::JoinHandle<()> {
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(every);
        loop {
            tick.tick().await;
            state.sessions.evict_idle(state.config.idle_timeout, Instant::now());
        }
    })
}

pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let state = Arc::new(AppState::new(config));
    spawn_evictor(state.clone(), Duration::from_secs(60));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}

/// Seeds stay below 2^53 so they survive a round trip through JavaScript.
fn fresh_seed() -> u64 {
    rand::random::<u64>() & ((1 << 53) - 1)
}

fn session(state: &AppState, id: &str) -> Result<session::SessionHandle, ApiError> {
    state.sessions.get(id).ok_or_else(|| ApiError::not_found(id))
}

fn snapshot(id: &str, s: &Session) -> GameSnapshot {
    GameSnapshot {
        session_id: id.to_string(),
        seed: s.seed,
        version: s.version,
        revision: s.revision,
        status: s.state.status().into(),
        view: BoardView::of(&s.state),
    }
}

fn move_response(s: &Session) -> MoveResponse {
    MoveResponse { view: BoardView::of(&s.state), status: s.state.status().into(), revision: s.revision }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

async fn create_game(
    State(app): State<Shared>,
    Json(req): Json<NewGame>,
) -> Result<(StatusCode, Json<GameSnapshot>), ApiError> {
    let seed = req.seed.unwrap_or_else(fresh_seed);
    let config = BoardConfig::new(req.p, req.q, req.n, seed).map_err(ApiError::from_game)?;
    let version = req.version.unwrap_or(app.default_version);
    let ctx = app.context(version, derive_seed(seed, &[version.code()]))?;
    let s = Session {
        state: GameState::new(config).map_err(ApiError::from_game)?,
        ctx,
        version,
        seed,
        revision: 0,
        last_access: Instant::now(),
    };
    let body = snapshot("", &s);
    let id = app.sessions.insert(s);
    Ok((StatusCode::CREATED, Json(GameSnapshot { session_id: id, ..body })))
}

async fn get_game(State(app): State<Shared>, Path(id): Path<String>) -> Result<Json<GameSnapshot>, ApiError> {
    let h = session(&app, &id)?;
    let s = session::lock(&h);
    Ok(Json(snapshot(&id, &s)))
}

async fn uncover(
    State(app): State<Shared>,
    Path(id): Path<String>,
    Json(cell): Json<CellRequest>,
) -> Result<Json<MoveResponse>, ApiError> {
    let h = session(&app, &id)?;
    let mut s = session::lock(&h);
    s.state.uncover(Coord::new(cell.i, cell.j)).map_err(ApiError::from_game)?;
    s.revision += 1;
    Ok(Json(move_response(&s)))
}

async fn flag(
    State(app): State<Shared>,
    Path(id): Path<String>,
    Json(cell): Json<CellRequest>,
) -> Result<Json<MoveResponse>, ApiError> {
    let h = session(&app, &id)?;
    let mut s = session::lock(&h);
    s.state.toggle_flag(Coord::new(cell.i, cell.j)).map_err(ApiError::from_game)?;
    s.revision += 1;
    Ok(Json(move_response(&s)))
}

async fn hint(
    State(app): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<HintQuery>,
) -> Result<Json<HintPayload>, ApiError> {
    let requested = q
        .version
        .map(|v| v.parse::<VersionId>().map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string())))
        .transpose()?;
    let h = session(&app, &id)?;
    let (state, version, seed, revision) = {
        let s = session::lock(&h);
        if s.state.status().is_finished() {
            return Err(ApiError::new(StatusCode::CONFLICT, "game is already finished"));
        }
        (s.state.clone(), requested.unwrap_or(s.version), s.seed, s.revision)
    };
    let app = app.clone();
    blocking(move || compute_hint(&app, &state, version, seed, revision)).await.map(Json)
}

/// Hint for a position. Reads nothing but the visible board; a fixed
/// (seed, revision, version) gives a fixed payload.
pub fn compute_hint(
    app: &AppState,
    state: &GameState,
    version: VersionId,
    seed: u64,
    revision: u64,
) -> Result<HintPayload, ApiError> {
    let view = state.masked();
    let mut rng = rng_from_seed(derive_seed(seed, &[revision, 0x41]));
    let deadline = Instant::now() + app.config.move_timeout;
    let report = frontier_report(&view, &app.config.hint_limits, &mut rng, Some(deadline));
    let mut ctx = app.context(version, derive_seed(seed, &[revision, version.code()]))?;
    let decision = decide(&view, &mut ctx).map_err(|e| ApiError::new(StatusCode::CONFLICT, e.to_string()))?;
    Ok(HintPayload {
        revision,
        version,
        determined_safe: report.determined_safe,
        determined_mines: report.determined_mines,
        probabilities: report
            .coords
            .iter()
            .zip(&report.probabilities)
            .map(|(&coordinate, &mine_probability)| CellProbability { coordinate, mine_probability })
            .collect(),
        recommended: Recommendation::from_decision(&decision),
        truncated: report.truncated || decision.truncated,
    })
}

async fn solver_move(State(app): State<Shared>, Path(id): Path<String>) -> Result<Json<SolverMoveResponse>, ApiError> {
    let h = session(&app, &id)?;
    blocking(move || {
        let mut s = session::lock(&h);
        if s.state.status().is_finished() {
            return Err(ApiError::new(StatusCode::GONE, "game is already finished"));
        }
        let s = &mut *s;
        let decision = decide(&s.state.masked(), &mut s.ctx)
            .map_err(|e| ApiError::new(StatusCode::CONFLICT, e.to_string()))?;
        apply_decision(&mut s.state, &decision).map_err(ApiError::from_game)?;
        s.revision += 1;
        Ok(SolverMoveResponse {
            applied: decision,
            view: BoardView::of(&s.state),
            status: s.state.status().into(),
            revision: s.revision,
        })
    })
    .await
    .map(Json)
}

async fn versions(State(app): State<Shared>) -> Json<Vec<VersionInfo>> {
    Json(
        VersionId::ALL
            .iter()
            .map(|&v| VersionInfo { version: v, ready: app.is_ready(v), default: v == app.default_version })
            .collect(),
    )
}
