//! Move-choice helpers layered on top of mine probabilities: the edge
//! distance tie-break, the location score, the blended score `Sc`, classifier
//! features and the score windows fed to the Q-network.

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csp::ConstraintSystem;
use crate::engine::{CellView, Coord, GameState};
use crate::rng::bounded;

/// Width of the probability band kept before the edge-distance tie-break.
pub const BAND_WIDTH: f64 = 0.05;

/// Score for uncovered, flagged and off-board positions.
pub const SENTINEL: f64 = -1.0;

// Absorbs rounding when comparing against a band edge.
const BAND_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeuristicError {
    #[error("location score needs at least one covered cell")]
    NoCoveredCells,
    #[error("{remaining} unflagged mines cannot fit in {covered} covered cells")]
    MineCount { remaining: i64, covered: usize },
}

pub fn manhattan_edge_distance(cell: Coord, p: usize, q: usize) -> usize {
    cell.row.min(cell.col).min(p - 1 - cell.row).min(q - 1 - cell.col)
}

/// Cells whose mine probability is within [`BAND_WIDTH`] of the minimum.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateBand {
    pub cells: Vec<(Coord, f64)>,
    /// Position of each member in the input vectors.
    pub indices: Vec<usize>,
}

impl CandidateBand {
    pub fn from_probabilities(probs: &[f64], coords: &[Coord]) -> Self {
        let min = probs.iter().copied().fold(f64::INFINITY, f64::min);
        let mut band = Self { cells: Vec::new(), indices: Vec::new() };
        for (k, (&p, &c)) in probs.iter().zip(coords).enumerate() {
            if p <= min + BAND_WIDTH + BAND_EPS {
                band.cells.push((c, p));
                band.indices.push(k);
            }
        }
        band
    }

    /// Same band taken from the top of a higher-is-better score vector.
    pub fn from_scores(scores: &[f64], coords: &[Coord]) -> Self {
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut band = Self { cells: Vec::new(), indices: Vec::new() };
        for (k, (&s, &c)) in scores.iter().zip(coords).enumerate() {
            if s >= max - BAND_WIDTH - BAND_EPS {
                band.cells.push((c, s));
                band.indices.push(k);
            }
        }
        band
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Band member closest to the board edge. Ties are broken uniformly at
/// random; no randomness is drawn when the closest member is unique.
/// Returns the member's position in `band.indices`.
fn closest_to_edge(band: &CandidateBand, p: usize, q: usize, rng: &mut impl RngCore) -> usize {
    let dist: Vec<usize> = band.cells.iter().map(|&(c, _)| manhattan_edge_distance(c, p, q)).collect();
    let best = *dist.iter().min().expect("band is never empty");
    let tied: Vec<usize> = (0..dist.len()).filter(|&k| dist[k] == best).collect();
    if tied.len() == 1 {
        tied[0]
    } else {
        tied[bounded(rng, tied.len() as u64) as usize]
    }
}

/// Index (into `probs`) of the band member nearest the edge.
pub fn pick_manhattan_index(
    probs: &[f64],
    coords: &[Coord],
    p: usize,
    q: usize,
    rng: &mut impl RngCore,
) -> usize {
    assert!(!probs.is_empty() && probs.len() == coords.len());
    let band = CandidateBand::from_probabilities(probs, coords);
    band.indices[closest_to_edge(&band, p, q, rng)]
}

pub fn pick_manhattan(probs: &[f64], coords: &[Coord], p: usize, q: usize, rng: &mut impl RngCore) -> Coord {
    coords[pick_manhattan_index(probs, coords, p, q, rng)]
}

/// The edge-distance rule applied to a higher-is-better score vector.
pub fn pick_manhattan_on_scores(
    scores: &[f64],
    coords: &[Coord],
    p: usize,
    q: usize,
    rng: &mut impl RngCore,
) -> usize {
    assert!(!scores.is_empty() && scores.len() == coords.len());
    let band = CandidateBand::from_scores(scores, coords);
    band.indices[closest_to_edge(&band, p, q, rng)]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placement {
    Corner,
    Edge,
    Interior,
}

impl Placement {
    pub fn of(cell: Coord, p: usize, q: usize) -> Self {
        let on_row_border = cell.row == 0 || cell.row + 1 == p;
        let on_col_border = cell.col == 0 || cell.col + 1 == q;
        match (on_row_border, on_col_border) {
            (true, true) => Self::Corner,
            (false, false) => Self::Interior,
            _ => Self::Edge,
        }
    }

    pub fn exponent(self) -> i32 {
        match self {
            Self::Corner => 4,
            Self::Edge => 6,
            Self::Interior => 8,
        }
    }
}

/// Chance that a cell has no mined neighbour, estimated from the remaining
/// mine density `(m - f) / l` raised to a power set by the cell's placement.
pub fn location_score(
    cell: Coord,
    p: usize,
    q: usize,
    mines: usize,
    flags: usize,
    covered_left: usize,
) -> Result<f64, HeuristicError> {
    if covered_left == 0 {
        return Err(HeuristicError::NoCoveredCells);
    }
    let remaining = mines as i64 - flags as i64;
    if remaining < 0 || remaining as usize > covered_left {
        return Err(HeuristicError::MineCount { remaining, covered: covered_left });
    }
    let density = remaining as f64 / covered_left as f64;
    Ok(1.0 - density.powi(Placement::of(cell, p, q).exponent()))
}

/// `α·(1 − P) + (1 − α)·loc`; higher is better.
pub fn combined_score(p_mine: f64, loc_score: f64, alpha: f64) -> f64 {
    alpha * (1.0 - p_mine) + (1.0 - alpha) * loc_score
}

/// Linear model of the best blend weight from the board shape:
/// `α = θ1·p + θ2·q + θ3·ratio + θ4`, clamped to `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaModel {
    pub theta: [f64; 4],
}

impl AlphaModel {
    pub const COEFFICIENT_NAMES: [&'static str; 4] = ["p", "q", "mine_ratio", "intercept"];

    pub fn constant(alpha: f64) -> Self {
        Self { theta: [0.0, 0.0, 0.0, alpha] }
    }

    pub fn predict(&self, p: usize, q: usize, mine_ratio: f64) -> f64 {
        let [a, b, c, d] = self.theta;
        (a * p as f64 + b * q as f64 + c * mine_ratio + d).clamp(0.0, 1.0)
    }
}

pub fn predict_alpha(model: &AlphaModel, p: usize, q: usize, mine_ratio: f64) -> f64 {
    model.predict(p, q, mine_ratio)
}

/// How covered cells away from the frontier are given a mine probability.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum OffFrontier {
    /// Always 0.5.
    #[default]
    Half,
    /// Unflagged mines not expected on the frontier, spread evenly.
    GlobalDensity,
}

/// Mine probability used for covered cells that are not frontier variables.
pub fn off_frontier_probability(state: &GameState, frontier_probs: &[f64], mode: OffFrontier) -> f64 {
    match mode {
        OffFrontier::Half => 0.5,
        OffFrontier::GlobalDensity => {
            let unflagged = state.covered_left() - state.flags_used();
            let off = unflagged.saturating_sub(frontier_probs.len());
            if off == 0 {
                return 0.5;
            }
            let expected: f64 = frontier_probs.iter().sum();
            let left = state.config().mines as f64 - state.flags_used() as f64 - expected;
            (left / off as f64).clamp(0.0, 1.0)
        }
    }
}

/// Per-cell `Sc` over the whole board.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreField {
    pub rows: usize,
    pub cols: usize,
    pub scores: Vec<f64>,
    pub alpha: f64,
}

impl ScoreField {
    pub fn get(&self, c: Coord) -> f64 {
        self.scores[c.row * self.cols + c.col]
    }
}

/// Scores every covered cell with [`combined_score`]. Frontier cells use
/// their entry of `probs` (aligned with `coords`); other covered cells use
/// [`off_frontier_probability`]. Uncovered and flagged cells get [`SENTINEL`].
pub fn score_field(
    state: &GameState,
    coords: &[Coord],
    probs: &[f64],
    alpha: f64,
    off: OffFrontier,
) -> Result<ScoreField, HeuristicError> {
    let (p, q) = (state.rows(), state.cols());
    let mut prob = vec![off_frontier_probability(state, probs, off); p * q];
    for (&c, &pm) in coords.iter().zip(probs) {
        prob[state.index(c)] = pm;
    }
    let mines = state.config().mines;
    let mut scores = vec![SENTINEL; p * q];
    for c in state.coords() {
        if state.cell(c) == CellView::Covered {
            let loc = location_score(c, p, q, mines, state.flags_used(), state.covered_left())?;
            scores[state.index(c)] = combined_score(prob[state.index(c)], loc, alpha);
        }
    }
    Ok(ScoreField { rows: p, cols: q, scores, alpha })
}

/// `sub × sub` window of a score field centred on an action cell, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SubState {
    pub sub: usize,
    pub values: Vec<f64>,
}

pub fn extract_substate(field: &ScoreField, action: Coord, sub: usize) -> SubState {
    assert!(sub % 2 == 1, "window size must be odd");
    let r = (sub / 2) as isize;
    let mut values = Vec::with_capacity(sub * sub);
    for di in -r..=r {
        for dj in -r..=r {
            let i = action.row as isize + di;
            let j = action.col as isize + dj;
            let inside = i >= 0 && j >= 0 && (i as usize) < field.rows && (j as usize) < field.cols;
            values.push(if inside { field.get(Coord::new(i as usize, j as usize)) } else { SENTINEL });
        }
    }
    SubState { sub, values }
}

/// Classifier input for one (position, action) pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub rows: usize,
    pub cols: usize,
    pub mines: usize,
    pub cell: Coord,
    pub mine_probability: f64,
    pub frontier_size: usize,
    /// Variable index of the lowest probability, or -1 with no frontier.
    pub min_prob_index: i64,
    pub location_score: f64,
}

impl FeatureVector {
    pub const WIDTH: usize = 9;

    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.rows as f64,
            self.cols as f64,
            self.mines as f64,
            self.cell.row as f64,
            self.cell.col as f64,
            self.mine_probability,
            self.frontier_size as f64,
            self.min_prob_index as f64,
            self.location_score,
        ]
    }
}

/// Index of the smallest entry; first one on ties.
pub fn argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v < values[b]) {
            best = Some(k);
        }
    }
    best
}

/// Index of the largest entry; first one on ties.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v > values[b]) {
            best = Some(k);
        }
    }
    best
}

/// `probs` is aligned with the variables of `system`; cells off the frontier
/// read as the `off` probability.
pub fn featurize(
    state: &GameState,
    system: &ConstraintSystem,
    probs: &[f64],
    action: Coord,
    off: OffFrontier,
) -> Result<FeatureVector, HeuristicError> {
    let (p, q) = (state.rows(), state.cols());
    let mine_probability =
        system.var_index(action).map_or_else(|| off_frontier_probability(state, probs, off), |k| probs[k]);
    let min_prob_index = argmin(probs).map_or(-1, |k| k as i64);
    Ok(FeatureVector {
        rows: p,
        cols: q,
        mines: state.config().mines,
        cell: action,
        mine_probability,
        frontier_size: system.num_vars(),
        min_prob_index,
        location_score: location_score(
            action,
            p,
            q,
            state.config().mines,
            state.flags_used(),
            state.covered_left(),
        )?,
    })
}
