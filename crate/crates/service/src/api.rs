//! Wire types. Field names are camelCase on the wire.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use minesweep_core::engine::{CellView, Coord, GameError, GameState, GameStatus};
use minesweep_core::policies::{MoveDecision, Rationale, VersionId};
use serde::{Deserialize, Serialize};

#[derive(Debug, Deserialize)]
pub struct NewGame {
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub seed: Option<u64>,
    pub version: Option<VersionId>,
}

#[derive(Debug, Deserialize)]
pub struct CellRequest {
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Deserialize)]
pub struct HintQuery {
    /// Parsed by the handler so a bad value gets a JSON error body.
    pub version: Option<String>,
}

/// One cell as the player sees it: `"covered"`, `"flagged"`, `"mine"` (only
/// once the game is over) or the adjacent-mine count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellJson {
    Number(u8),
    State(CellState),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CellState {
    Covered,
    Flagged,
    Mine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum StatusJson {
    InProgress,
    Won,
    Lost,
}

impl From<GameStatus> for StatusJson {
    fn from(s: GameStatus) -> Self {
        match s {
            GameStatus::InProgress => Self::InProgress,
            GameStatus::Won => Self::Won,
            GameStatus::Lost => Self::Lost,
        }
    }
}

/// The board as a player sees it. Mine positions appear only after the
/// game has ended.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoardView {
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub flags: usize,
    pub cells: Vec<Vec<CellJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mines: Option<Vec<Coord>>,
}

impl BoardView {
    pub fn of(state: &GameState) -> Self {
        let finished = state.status().is_finished();
        let cells = (0..state.rows())
            .map(|i| {
                (0..state.cols())
                    .map(|j| {
                        let c = Coord::new(i, j);
                        match state.cell(c) {
                            CellView::Uncovered(k) => CellJson::Number(k),
                            _ if finished && state.is_mine(c) => CellJson::State(CellState::Mine),
                            CellView::Flagged => CellJson::State(CellState::Flagged),
                            CellView::Covered => CellJson::State(CellState::Covered),
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            p: state.rows(),
            q: state.cols(),
            n: state.config().mines,
            flags: state.flags_used(),
            cells,
            mines: finished.then(|| state.mine_cells()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GameSnapshot {
    pub session_id: String,
    pub seed: u64,
    pub version: VersionId,
    pub revision: u64,
    pub status: StatusJson,
    pub view: BoardView,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MoveResponse {
    pub view: BoardView,
    pub status: StatusJson,
    pub revision: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolverMoveResponse {
    pub applied: MoveDecision,
    pub view: BoardView,
    pub status: StatusJson,
    pub revision: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CellProbability {
    pub coordinate: Coord,
    pub mine_probability: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum HintAction {
    Uncover,
    Flag,
    Unflag,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Recommendation {
    pub coordinate: Coord,
    pub action: HintAction,
    pub rationale: Rationale,
}

impl Recommendation {
    pub fn from_decision(d: &MoveDecision) -> Option<Self> {
        let (coordinate, action) = d
            .uncovers
            .first()
            .map(|&c| (c, HintAction::Uncover))
            .or_else(|| d.flags.first().map(|&c| (c, HintAction::Flag)))
            .or_else(|| d.unflags.first().map(|&c| (c, HintAction::Unflag)))?;
        Some(Self { coordinate, action, rationale: d.rationale })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HintPayload {
    pub revision: u64,
    pub version: VersionId,
    pub determined_safe: Vec<Coord>,
    pub determined_mines: Vec<Coord>,
    pub probabilities: Vec<CellProbability>,
    pub recommended: Option<Recommendation>,
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VersionInfo {
    pub version: VersionId,
    pub ready: bool,
    pub default: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }

    pub fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("no session {id:?}"))
    }

    /// 410 for moves on a finished game, 409 for illegal moves, 400 for
    /// malformed requests.
    pub fn from_game(e: GameError) -> Self {
        let status = match e {
            GameError::Finished => StatusCode::GONE,
            GameError::IllegalMove { .. } => StatusCode::CONFLICT,
            GameError::InvalidConfig(_) | GameError::OutOfBounds(_) => StatusCode::BAD_REQUEST,
        };
        Self::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}
