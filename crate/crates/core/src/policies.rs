//! Solver versions and the per-move decision procedure.
//!
//! Every version follows the same two steps. The row rules run first and any
//! cell they settle is played directly. Otherwise the solution set of the
//! frontier is enumerated, mine probabilities are read off it, and a
//! version-specific selector picks one covered cell to open.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csp::{
    dss, enumerate_backtracking_until, enumerate_dsscsp_until, probabilities, ConstraintSystem, CspError,
    TraversalLimits,
};
use crate::engine::{BoardConfig, CellView, Coord, GameError, GameState, GameStatus, Reveal};
use crate::heuristics::{
    argmax, argmin, extract_substate, featurize, pick_manhattan_index, pick_manhattan_on_scores, score_field,
    off_frontier_probability, AlphaModel, CandidateBand, HeuristicError, OffFrontier, ScoreField,
};
use crate::neural::{load_alpha, load_model, Mlp, NeuralError};
use crate::rng::{derive_seed, rng_from_seed, GameRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VersionId {
    V1_0,
    V2_0,
    V2_5,
    V3_0,
    V3_5,
    V4_0,
    V4_5,
    V5_0,
    V5_5,
    V6_0,
    V6_5,
}

impl VersionId {
    pub const ALL: [VersionId; 11] = [
        Self::V1_0,
        Self::V2_0,
        Self::V2_5,
        Self::V3_0,
        Self::V3_5,
        Self::V4_0,
        Self::V4_5,
        Self::V5_0,
        Self::V5_5,
        Self::V6_0,
        Self::V6_5,
    ];

    /// Versions benchmarked by default; plain backtracking is left out.
    pub const BENCHMARKED: [VersionId; 10] = [
        Self::V2_0,
        Self::V2_5,
        Self::V3_0,
        Self::V3_5,
        Self::V4_0,
        Self::V4_5,
        Self::V5_0,
        Self::V5_5,
        Self::V6_0,
        Self::V6_5,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::V1_0 => "1.0",
            Self::V2_0 => "2.0",
            Self::V2_5 => "2.5",
            Self::V3_0 => "3.0",
            Self::V3_5 => "3.5",
            Self::V4_0 => "4.0",
            Self::V4_5 => "4.5",
            Self::V5_0 => "5.0",
            Self::V5_5 => "5.5",
            Self::V6_0 => "6.0",
            Self::V6_5 => "6.5",
        }
    }

    /// Stable small integer, used when deriving seeds.
    pub fn code(self) -> u64 {
        Self::ALL.iter().position(|&v| v == self).unwrap() as u64
    }

    pub fn pipeline(self) -> Pipeline {
        use Enumerator::*;
        use Selector::*;
        let (enumerator, capped, use_dss, selector) = match self {
            Self::V1_0 => (Backtracking, false, false, MinProbability),
            Self::V2_0 => (Backtracking, false, true, MinProbability),
            Self::V2_5 => (Backtracking, true, true, MinProbability),
            Self::V3_0 => (DssCsp, false, true, MinProbability),
            Self::V3_5 => (DssCsp, true, true, MinProbability),
            Self::V4_0 => (DssCsp, false, true, Manhattan),
            Self::V4_5 => (DssCsp, true, true, Manhattan),
            Self::V5_0 | Self::V5_5 => (DssCsp, true, true, Classifier),
            Self::V6_0 | Self::V6_5 => (DssCsp, true, true, QValue),
        };
        Pipeline { enumerator, capped, use_dss, selector }
    }

    pub fn needs_classifier(self) -> bool {
        matches!(self, Self::V5_0 | Self::V5_5)
    }

    pub fn needs_qnet(self) -> bool {
        matches!(self, Self::V6_0 | Self::V6_5)
    }

    pub fn is_learned(self) -> bool {
        self.needs_classifier() || self.needs_qnet()
    }
}

impl fmt::Display for VersionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown solver version {0:?}")]
pub struct UnknownVersion(pub String);

impl FromStr for VersionId {
    type Err = UnknownVersion;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().trim_start_matches(['v', 'V']);
        let t = if t.contains('.') { t.to_string() } else { format!("{t}.0") };
        Self::ALL.iter().copied().find(|v| v.as_str() == t).ok_or_else(|| UnknownVersion(s.to_string()))
    }
}

impl Serialize for VersionId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for VersionId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Enumerator {
    Backtracking,
    DssCsp,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Selector {
    /// Lowest mine probability; lowest index on ties.
    MinProbability,
    /// Edge-nearest cell within the probability band.
    Manhattan,
    /// Highest classifier output over every covered cell.
    Classifier,
    /// Highest Q-network output over the score band.
    QValue,
    /// The edge-distance rule on `Sc` with a fixed blend weight.
    ManhattanOnScore { alpha: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pipeline {
    pub enumerator: Enumerator,
    pub capped: bool,
    pub use_dss: bool,
    pub selector: Selector,
}

impl Pipeline {
    pub fn limits(&self) -> TraversalLimits {
        match (self.capped, self.enumerator) {
            (false, _) => TraversalLimits::unlimited(),
            (true, Enumerator::DssCsp) => TraversalLimits::dsscsp_capped(),
            (true, Enumerator::Backtracking) => TraversalLimits::backtracking_capped(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Rationale {
    FirstMove,
    Deterministic,
    ProbabilityMin,
    Manhattan,
    Classifier,
    QValue,
    /// The visible flags contradict the numbers; a flag is taken back.
    Contradiction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbabilitySnapshot {
    pub coords: Vec<Coord>,
    pub probabilities: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MoveDecision {
    pub flags: Vec<Coord>,
    pub uncovers: Vec<Coord>,
    pub unflags: Vec<Coord>,
    pub rationale: Rationale,
    pub probability_snapshot: Option<ProbabilitySnapshot>,
    /// The probabilities came from a capped or interrupted enumeration.
    pub truncated: bool,
}

impl MoveDecision {
    fn single(cell: Coord, rationale: Rationale) -> Self {
        Self {
            flags: Vec::new(),
            uncovers: vec![cell],
            unflags: Vec::new(),
            rationale,
            probability_snapshot: None,
            truncated: false,
        }
    }

    pub fn is_probabilistic(&self) -> bool {
        matches!(
            self.rationale,
            Rationale::ProbabilityMin | Rationale::Manhattan | Rationale::Classifier | Rationale::QValue
        )
    }
}

/// Trained models a context may draw on.
#[derive(Clone, Debug, Default)]
pub struct Models {
    pub classifier: Option<Arc<Mlp>>,
    pub qnet: Option<Arc<Mlp>>,
    pub alpha: Option<AlphaModel>,
}

/// Off-frontier probability in classifier features, for both data
/// collection and play.
pub const FEATURE_OFF_FRONTIER: OffFrontier = OffFrontier::GlobalDensity;

pub const ALPHA_FILE: &str = "alpha.model";

/// File name of the trained network a learned version plays with.
pub fn model_file(version: VersionId) -> Option<&'static str> {
    match version {
        VersionId::V5_0 => Some("classifier-5.0.model"),
        VersionId::V5_5 => Some("classifier-5.5.model"),
        VersionId::V6_0 => Some("qnet-6.0.model"),
        VersionId::V6_5 => Some("qnet-6.5.model"),
        _ => None,
    }
}

impl Models {
    /// Loads whatever `version` needs from `dir` (nothing for the search-only
    /// versions).
    pub fn load_for(dir: &Path, version: VersionId) -> Result<Self, NeuralError> {
        let mut models = Self::default();
        if let Some(file) = model_file(version) {
            let net = Arc::new(load_model(dir.join(file))?);
            if version.needs_classifier() {
                models.classifier = Some(net);
            } else {
                models.qnet = Some(net);
                models.alpha = Some(load_alpha(dir.join(ALPHA_FILE))?);
            }
        }
        Ok(models)
    }
}

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("version {version} needs a {model} model")]
    MissingModel { version: String, model: &'static str },
    #[error("{model} model expects input width {expected}, got {got}")]
    ModelShape { model: &'static str, expected: usize, got: usize },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Heuristic(#[from] HeuristicError),
}

/// Everything `decide` needs besides the position.
#[derive(Clone, Debug)]
pub struct PolicyContext {
    pub version: Option<VersionId>,
    pub pipeline: Pipeline,
    pub limits: TraversalLimits,
    pub classifier: Option<Arc<Mlp>>,
    pub qnet: Option<Arc<Mlp>>,
    pub alpha: Option<AlphaModel>,
    pub off_frontier: OffFrontier,
    /// Probability at which covered cells outside the frontier are offered
    /// as guesses alongside the frontier; `None` guesses on the frontier only.
    pub off_frontier_candidates: Option<OffFrontier>,
    /// Off-frontier probability written into classifier features.
    pub feature_off_frontier: OffFrontier,
    /// Sub-state window size for the Q-network.
    pub sub: usize,
    pub move_timeout: Option<Duration>,
    /// Hard stop for the current game, set by [`play_game`].
    pub deadline: Option<Instant>,
    enum_rng: GameRng,
    choice_rng: GameRng,
}

impl PolicyContext {
    pub fn new(version: VersionId, models: &Models, seed: u64) -> Result<Self, PolicyError> {
        let mut ctx = Self::for_pipeline(version.pipeline(), models, seed)?;
        ctx.version = Some(version);
        Ok(ctx)
    }

    /// Context for an arbitrary pipeline; used by experiments that vary the
    /// selector outside the version table.
    pub fn for_pipeline(pipeline: Pipeline, models: &Models, seed: u64) -> Result<Self, PolicyError> {
        let name = || format!("{:?}", pipeline.selector);
        let classifier = models.classifier.clone();
        let qnet = models.qnet.clone();
        match pipeline.selector {
            Selector::Classifier => {
                let m = classifier
                    .as_ref()
                    .ok_or_else(|| PolicyError::MissingModel { version: name(), model: "classifier" })?;
                let w = crate::heuristics::FeatureVector::WIDTH;
                if m.input_width() != w {
                    return Err(PolicyError::ModelShape { model: "classifier", expected: w, got: m.input_width() });
                }
            }
            Selector::QValue => {
                let m = qnet.as_ref().ok_or_else(|| PolicyError::MissingModel { version: name(), model: "qnet" })?;
                if models.alpha.is_none() {
                    return Err(PolicyError::MissingModel { version: name(), model: "alpha" });
                }
                if m.input_width() != 9 {
                    return Err(PolicyError::ModelShape { model: "qnet", expected: 9, got: m.input_width() });
                }
            }
            _ => {}
        }
        Ok(Self {
            version: None,
            pipeline,
            limits: pipeline.limits(),
            classifier,
            qnet,
            alpha: models.alpha,
            off_frontier: OffFrontier::Half,
            off_frontier_candidates: Some(OffFrontier::GlobalDensity),
            feature_off_frontier: FEATURE_OFF_FRONTIER,
            sub: 3,
            move_timeout: None,
            deadline: None,
            enum_rng: rng_from_seed(derive_seed(seed, &[0])),
            choice_rng: rng_from_seed(derive_seed(seed, &[1])),
        })
    }

    /// Restarts both random streams from `seed`.
    pub fn reseed(&mut self, seed: u64) {
        self.enum_rng = rng_from_seed(derive_seed(seed, &[0]));
        self.choice_rng = rng_from_seed(derive_seed(seed, &[1]));
    }

    pub fn choice_rng(&mut self) -> &mut GameRng {
        &mut self.choice_rng
    }

    fn move_deadline(&self) -> Option<Instant> {
        let per_move = self.move_timeout.map(|t| Instant::now() + t);
        match (per_move, self.deadline) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Opening cell: the board centre, rounded toward the origin.
pub fn opening_cell(rows: usize, cols: usize) -> Coord {
    Coord::new((rows - 1) / 2, (cols - 1) / 2)
}

/// Intermediate results of one decision, for observers and hints.
#[derive(Clone, Debug, Default)]
pub struct MoveAnalysis {
    pub system: Option<ConstraintSystem>,
    /// Candidate cells and their mine probabilities (aligned).
    pub coords: Vec<Coord>,
    pub probabilities: Vec<f64>,
    /// Variable indices of `system` settled by the row rules.
    pub determined: Vec<(Coord, bool)>,
    pub field: Option<ScoreField>,
    pub truncated: bool,
}

/// Picks the next move using only what is visible on `state`.
pub fn decide(state: &GameState, ctx: &mut PolicyContext) -> Result<MoveDecision, PolicyError> {
    decide_detailed(state, ctx).map(|(d, _)| d)
}

fn unflag_latest(state: &GameState) -> Option<MoveDecision> {
    state.flag_history().last().map(|&c| MoveDecision {
        flags: Vec::new(),
        uncovers: Vec::new(),
        unflags: vec![c],
        rationale: Rationale::Contradiction,
        probability_snapshot: None,
        truncated: false,
    })
}

fn covered_cells(state: &GameState) -> Vec<Coord> {
    state.coords().filter(|&c| state.cell(c) == CellView::Covered).collect()
}

pub fn decide_detailed(state: &GameState, ctx: &mut PolicyContext) -> Result<(MoveDecision, MoveAnalysis), PolicyError> {
    if state.status().is_finished() {
        return Err(GameError::Finished.into());
    }
    let mut analysis = MoveAnalysis::default();
    if !state.first_move_done() {
        let c = opening_cell(state.rows(), state.cols());
        if state.cell(c) == CellView::Covered {
            return Ok((MoveDecision::single(c, Rationale::FirstMove), analysis));
        }
    }

    let system = match ConstraintSystem::extract(state) {
        Ok(s) => s,
        Err(_) => return contradiction(state, analysis),
    };

    if ctx.pipeline.use_dss {
        let mut reduced = system.clone();
        match dss(&mut reduced) {
            Err(_) => return contradiction(state, analysis),
            Ok(det) if !det.is_empty() => {
                let coords = system.coords();
                let mut decision = MoveDecision::single(coords[0], Rationale::Deterministic);
                decision.uncovers = det.safe().map(|j| coords[j]).collect();
                decision.flags = det.mines().map(|j| coords[j]).collect();
                analysis.determined = det.entries.iter().map(|&(j, m)| (coords[j], m)).collect();
                analysis.system = Some(system);
                return Ok((decision, analysis));
            }
            Ok(_) => {}
        }
    }

    let deadline = ctx.move_deadline();
    let (mut coords, mut probs, truncated) = if system.is_empty() {
        let cells = covered_cells(state);
        let n = cells.len();
        (cells, vec![0.5; n], false)
    } else {
        let set = match ctx.pipeline.enumerator {
            Enumerator::Backtracking => enumerate_backtracking_until(&system, &ctx.limits, deadline),
            Enumerator::DssCsp => enumerate_dsscsp_until(&system, &ctx.limits, &mut ctx.enum_rng, deadline),
        };
        match probabilities(&set) {
            Ok(p) => (system.coords(), p, set.truncated),
            Err(CspError::EmptySolutionSet) if !set.truncated => {
                if let Some(d) = unflag_latest(state) {
                    return Ok((d, analysis));
                }
                (system.coords(), vec![0.5; system.num_vars()], false)
            }
            Err(_) => (system.coords(), vec![0.5; system.num_vars()], true),
        }
    };
    let frontier_len = coords.len();
    if let (Some(mode), false) = (ctx.off_frontier_candidates, system.is_empty()) {
        let off = off_frontier_probability(state, &probs, mode);
        let frontier: std::collections::HashSet<Coord> = coords.iter().copied().collect();
        for c in covered_cells(state) {
            if !frontier.contains(&c) {
                coords.push(c);
                probs.push(off);
            }
        }
    }
    if coords.is_empty() {
        // Only flagged cells remain covered, so some flag must be wrong.
        return contradiction(state, analysis);
    }

    let p = state.rows();
    let q = state.cols();
    let (choice, rationale) = match ctx.pipeline.selector {
        Selector::MinProbability => (coords[argmin(&probs).unwrap()], Rationale::ProbabilityMin),
        Selector::Manhattan => {
            (coords[pick_manhattan_index(&probs, &coords, p, q, &mut ctx.choice_rng)], Rationale::Manhattan)
        }
        Selector::Classifier => {
            let model = ctx.classifier.as_ref().expect("checked at construction");
            let cells = covered_cells(state);
            let frontier_probs = if system.is_empty() { &[][..] } else { &probs[..frontier_len] };
            let mut scores = Vec::with_capacity(cells.len());
            for &c in &cells {
                let f = featurize(state, &system, frontier_probs, c, ctx.feature_off_frontier)?;
                scores.push(model.eval(&f.to_vec()));
            }
            (cells[argmax(&scores).unwrap()], Rationale::Classifier)
        }
        Selector::QValue => {
            let model = ctx.qnet.as_ref().expect("checked at construction");
            let alpha = ctx.alpha.expect("checked at construction").predict(p, q, state.config().mine_ratio());
            let field = field_for(state, &system, &coords, &probs, alpha, ctx.off_frontier)?;
            let scores: Vec<f64> = coords.iter().map(|&c| field.get(c)).collect();
            let band = CandidateBand::from_scores(&scores, &coords);
            let qs: Vec<f64> =
                band.cells.iter().map(|&(c, _)| model.eval(&extract_substate(&field, c, ctx.sub).values)).collect();
            let pick = band.cells[argmax(&qs).unwrap()].0;
            analysis.field = Some(field);
            (pick, Rationale::QValue)
        }
        Selector::ManhattanOnScore { alpha } => {
            let field = field_for(state, &system, &coords, &probs, alpha, ctx.off_frontier)?;
            let scores: Vec<f64> = coords.iter().map(|&c| field.get(c)).collect();
            let k = pick_manhattan_on_scores(&scores, &coords, p, q, &mut ctx.choice_rng);
            analysis.field = Some(field);
            (coords[k], Rationale::Manhattan)
        }
    };

    let mut decision = MoveDecision::single(choice, rationale);
    decision.truncated = truncated;
    decision.probability_snapshot = Some(ProbabilitySnapshot { coords: coords.clone(), probabilities: probs.clone() });
    analysis.system = Some(system);
    analysis.coords = coords;
    analysis.probabilities = probs;
    analysis.truncated = truncated;
    Ok((decision, analysis))
}

// Score field from candidate probabilities; with no frontier every covered
// cell is off-frontier.
fn field_for(
    state: &GameState,
    system: &ConstraintSystem,
    coords: &[Coord],
    probs: &[f64],
    alpha: f64,
    off: OffFrontier,
) -> Result<ScoreField, HeuristicError> {
    if system.is_empty() {
        score_field(state, &[], &[], alpha, off)
    } else {
        score_field(state, coords, probs, alpha, off)
    }
}

fn contradiction(state: &GameState, analysis: MoveAnalysis) -> Result<(MoveDecision, MoveAnalysis), PolicyError> {
    match unflag_latest(state) {
        Some(d) => Ok((d, analysis)),
        // No flag to blame; fall back to any covered cell.
        None => {
            let c = covered_cells(state).into_iter().next().ok_or(GameError::Finished)?;
            Ok((MoveDecision::single(c, Rationale::Contradiction), analysis))
        }
    }
}

/// Applies a decision: unflags, then flags, then uncovers in order. Cells
/// opened earlier in the same batch are skipped; stops once the game ends.
pub fn apply_decision(state: &mut GameState, decision: &MoveDecision) -> Result<Vec<Reveal>, GameError> {
    for &c in &decision.unflags {
        if state.cell(c) == CellView::Flagged {
            state.toggle_flag(c)?;
        }
    }
    for &c in &decision.flags {
        if state.cell(c) == CellView::Covered {
            state.toggle_flag(c)?;
        }
    }
    let mut reveals = Vec::new();
    for &c in &decision.uncovers {
        if state.status().is_finished() {
            break;
        }
        if state.cell(c) == CellView::Covered {
            reveals.push(state.uncover(c)?);
        }
    }
    Ok(reveals)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GameResult {
    pub won: bool,
    pub moves: usize,
    pub elapsed: Duration,
    pub timed_out: bool,
    /// Wall time of each decision, in order.
    pub move_times: Vec<Duration>,
}

/// Hook into each applied move.
pub trait GameObserver {
    fn on_move(
        &mut self,
        _before: &GameState,
        _decision: &MoveDecision,
        _analysis: &MoveAnalysis,
        _reveals: &[Reveal],
        _after: &GameState,
    ) {
    }

    fn on_finish(&mut self, _state: &GameState, _result: &GameResult) {}
}

impl GameObserver for () {}

/// Plays one game to the end. A game that passes `timeout` is stopped and
/// counted as a loss.
pub fn play_game(config: BoardConfig, ctx: &mut PolicyContext, timeout: Option<Duration>) -> GameResult {
    play_game_observed(config, ctx, timeout, &mut ())
}

pub fn play_game_observed(
    config: BoardConfig,
    ctx: &mut PolicyContext,
    timeout: Option<Duration>,
    observer: &mut impl GameObserver,
) -> GameResult {
    let start = Instant::now();
    ctx.deadline = timeout.map(|t| start + t);
    let mut result = GameResult { won: false, moves: 0, elapsed: Duration::ZERO, timed_out: false, move_times: Vec::new() };
    let Ok(mut state) = GameState::new(config) else {
        return result;
    };
    // Each round opens or flags at least one cell unless it takes a flag
    // back, so this bound is never reached in normal play.
    let max_rounds = 4 * config.cells() + 8;
    while !state.status().is_finished() && result.moves < max_rounds {
        if ctx.deadline.is_some_and(|d| Instant::now() >= d) {
            result.timed_out = true;
            break;
        }
        let t0 = Instant::now();
        let Ok((decision, analysis)) = decide_detailed(&state, ctx) else { break };
        let before = state.clone();
        let reveals = match apply_decision(&mut state, &decision) {
            Ok(r) => r,
            Err(_) => break,
        };
        result.move_times.push(t0.elapsed());
        result.moves += 1;
        observer.on_move(&before, &decision, &analysis, &reveals, &state);
    }
    if !result.timed_out && ctx.deadline.is_some_and(|d| Instant::now() > d) && state.status() != GameStatus::Won {
        result.timed_out = true;
    }
    result.won = state.status() == GameStatus::Won && !result.timed_out;
    result.elapsed = start.elapsed();
    ctx.deadline = None;
    observer.on_finish(&state, &result);
    result
}

/// Deterministic and probabilistic view of a position for advising a
/// player: cells settled by the row rules, probabilities for the rest.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrontierReport {
    pub determined_safe: Vec<Coord>,
    pub determined_mines: Vec<Coord>,
    pub coords: Vec<Coord>,
    pub probabilities: Vec<f64>,
    pub truncated: bool,
    pub contradiction: bool,
}

pub fn frontier_report(
    state: &GameState,
    limits: &TraversalLimits,
    rng: &mut impl Rng,
    deadline: Option<Instant>,
) -> FrontierReport {
    let mut report = FrontierReport::default();
    let Ok(system) = ConstraintSystem::extract(state) else {
        report.contradiction = true;
        return report;
    };
    let mut reduced = system.clone();
    let Ok(det) = dss(&mut reduced) else {
        report.contradiction = true;
        return report;
    };
    let coords = system.coords();
    report.determined_safe = det.safe().map(|j| coords[j]).collect();
    report.determined_mines = det.mines().map(|j| coords[j]).collect();
    let open: Vec<usize> = (0..system.num_vars()).filter(|&j| !reduced.is_assigned(j)).collect();
    if open.is_empty() {
        return report;
    }
    let set = enumerate_dsscsp_until(&reduced, limits, rng, deadline);
    report.truncated = set.truncated;
    match probabilities(&set) {
        Ok(p) => {
            report.coords = open.iter().map(|&j| coords[j]).collect();
            report.probabilities = open.iter().map(|&j| p[j]).collect();
        }
        Err(_) if !set.truncated => report.contradiction = true,
        Err(_) => {
            report.coords = open.iter().map(|&j| coords[j]).collect();
            report.probabilities = vec![0.5; open.len()];
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(i: usize, j: usize) -> Coord {
        Coord::new(i, j)
    }

    fn ctx(v: VersionId) -> PolicyContext {
        PolicyContext::new(v, &Models::default(), 7).unwrap()
    }

    #[test]
    fn version_strings_round_trip() {
        for v in VersionId::ALL {
            assert_eq!(v.as_str().parse::<VersionId>().unwrap(), v);
        }
        assert_eq!("v4.5".parse::<VersionId>().unwrap(), VersionId::V4_5);
        assert_eq!("3".parse::<VersionId>().unwrap(), VersionId::V3_0);
        assert!("7.0".parse::<VersionId>().is_err());
    }

    #[test]
    fn version_table() {
        assert!(!VersionId::V1_0.pipeline().use_dss);
        assert_eq!(VersionId::V2_5.pipeline().limits(), TraversalLimits::backtracking_capped());
        assert_eq!(VersionId::V3_0.pipeline().limits(), TraversalLimits::unlimited());
        assert_eq!(VersionId::V4_5.pipeline().limits(), TraversalLimits::dsscsp_capped());
        assert_eq!(VersionId::V6_5.pipeline().selector, Selector::QValue);
        assert!(VersionId::V5_0.pipeline().capped);
    }

    #[test]
    fn learned_versions_need_models() {
        for v in [VersionId::V5_0, VersionId::V5_5, VersionId::V6_0, VersionId::V6_5] {
            assert!(matches!(
                PolicyContext::new(v, &Models::default(), 1),
                Err(PolicyError::MissingModel { .. })
            ));
        }
    }

    #[test]
    fn first_move_is_the_centre() {
        let g = GameState::new(BoardConfig::new(9, 9, 10, 1).unwrap()).unwrap();
        let d = decide(&g, &mut ctx(VersionId::V3_0)).unwrap();
        assert_eq!(d.uncovers, vec![c(4, 4)]);
        assert_eq!(d.rationale, Rationale::FirstMove);
        assert_eq!(opening_cell(4, 6), c(1, 2));
    }

    #[test]
    fn zero_row_uncovers_everything_in_it() {
        // The flag accounts for the 1 at (1,1), so its other four
        // neighbours are safe.
        let mut g = GameState::with_layout(2, 3, &[c(0, 0)]).unwrap();
        g.toggle_flag(c(0, 0)).unwrap();
        g.uncover(c(1, 1)).unwrap();
        let d = decide(&g, &mut ctx(VersionId::V3_0)).unwrap();
        assert_eq!(d.rationale, Rationale::Deterministic);
        assert_eq!(d.uncovers, vec![c(0, 1), c(0, 2), c(1, 0), c(1, 2)]);
        assert!(d.flags.is_empty());
    }

    #[test]
    fn full_rows_flag_and_chain() {
        // 3x4 with the top-left three cells mined; opening (2,0) floods the
        // lower rows and leaves the top row covered.
        let mut g = GameState::with_layout(3, 4, &[c(0, 0), c(0, 1), c(0, 2)]).unwrap();
        g.uncover(c(2, 0)).unwrap();
        let d = decide(&g, &mut ctx(VersionId::V2_0)).unwrap();
        assert_eq!(d.rationale, Rationale::Deterministic);
        let mut flags = d.flags.clone();
        flags.sort();
        assert_eq!(flags, vec![c(0, 0), c(0, 1), c(0, 2)]);
        assert_eq!(d.uncovers, vec![c(0, 3)]);
        let mut g2 = g.clone();
        apply_decision(&mut g2, &d).unwrap();
        assert_eq!(g2.status(), GameStatus::Won);
    }

    #[test]
    fn half_and_half_picks_lowest_index() {
        // 1x3 mine on the right, open the middle: P = (0.5, 0.5).
        let mut g = GameState::with_layout(1, 3, &[c(0, 2)]).unwrap();
        g.uncover(c(0, 1)).unwrap();
        let (d, a) = decide_detailed(&g, &mut ctx(VersionId::V3_0)).unwrap();
        assert_eq!(d.rationale, Rationale::ProbabilityMin);
        assert_eq!(d.uncovers, vec![c(0, 0)]);
        assert_eq!(a.probabilities, vec![0.5, 0.5]);
    }

    #[test]
    fn contradiction_takes_back_the_latest_flag() {
        let mut g = GameState::with_layout(1, 3, &[c(0, 2)]).unwrap();
        g.uncover(c(0, 1)).unwrap();
        g.toggle_flag(c(0, 0)).unwrap();
        g.toggle_flag(c(0, 2)).unwrap();
        let d = decide(&g, &mut ctx(VersionId::V3_0)).unwrap();
        assert_eq!(d.rationale, Rationale::Contradiction);
        assert_eq!(d.unflags, vec![c(0, 2)]);
    }

    #[test]
    fn tiny_boards_are_always_won() {
        for seed in 0..20 {
            let mut cx = ctx(VersionId::V4_0);
            let r = play_game(BoardConfig::new(1, 2, 1, seed).unwrap(), &mut cx, None);
            assert!(r.won);
            assert_eq!(r.moves, 1);
            let r = play_game(BoardConfig::new(3, 3, 8, seed).unwrap(), &mut cx, None);
            assert!(r.won && r.moves == 1);
        }
    }

    #[test]
    fn beginner_games_finish_within_bounds() {
        for v in [VersionId::V2_0, VersionId::V3_5, VersionId::V4_5] {
            let mut cx = ctx(v);
            for seed in 0..10 {
                let r = play_game(BoardConfig::new(9, 9, 10, seed).unwrap(), &mut cx, None);
                assert!(r.moves <= 81);
                assert_eq!(r.move_times.len(), r.moves);
            }
        }
    }

    #[test]
    fn expired_timeout_is_a_loss() {
        let mut cx = ctx(VersionId::V3_0);
        let r = play_game(BoardConfig::new(9, 9, 10, 3).unwrap(), &mut cx, Some(Duration::ZERO));
        assert!(r.timed_out && !r.won);
    }

    #[test]
    fn report_separates_determined_cells() {
        let mut g = GameState::with_layout(1, 3, &[c(0, 2)]).unwrap();
        g.uncover(c(0, 1)).unwrap();
        let r = frontier_report(&g, &TraversalLimits::dsscsp_capped(), &mut rng_from_seed(1), None);
        assert!(r.determined_safe.is_empty() && r.determined_mines.is_empty());
        assert_eq!(r.probabilities, vec![0.5, 0.5]);
    }
}
