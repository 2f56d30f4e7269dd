use nalgebra::{DMatrix, DVector};

use super::{play_boards, SweepGrid, TrainingError};
use crate::heuristics::AlphaModel;
use crate::policies::{GameObserver, GameResult, Models, PolicyContext, Selector, VersionId};
use crate::rng::derive_seed;
use crate::GameState;

/// 0, 1/30, …, 1.
pub fn default_alphas() -> Vec<f64> {
    (0..=30).map(|k| k as f64 / 30.0).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlphaSweepRow {
    pub rows: usize,
    pub cols: usize,
    pub mines: usize,
    /// Win ratio for each swept α, in the order given.
    pub win_ratios: Vec<f64>,
    pub best_alpha: f64,
    pub best_win_ratio: f64,
}

impl AlphaSweepRow {
    pub fn mine_ratio(&self) -> f64 {
        self.mines as f64 / (self.rows * self.cols) as f64
    }
}

#[derive(Default)]
struct WinCounter(bool);

impl GameObserver for WinCounter {
    fn on_finish(&mut self, _: &GameState, result: &GameResult) {
        self.0 = result.won;
    }
}

/// For each grid cell and α, plays the cell's games with the Manhattan rule
/// applied to the blended score instead of the mine probability. Every α
/// sees the same boards and policy seeds. The best α is the one with the
/// highest win ratio; among ties the median tied α (the lower one for an
/// even count) is taken.
pub fn alpha_sweep(grid: &SweepGrid, alphas: &[f64]) -> Result<Vec<AlphaSweepRow>, TrainingError> {
    if alphas.is_empty() || alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(TrainingError::Invalid("alphas must be a non-empty subset of [0, 1]".into()));
    }
    let boards = grid.boards();
    let per_cell = grid.games_per_cell.max(1);
    let mut rows = Vec::new();
    for (k, &(r, c, n)) in grid.cells().iter().enumerate() {
        let cell_boards = &boards[k * per_cell..(k + 1) * per_cell];
        let mut win_ratios = Vec::with_capacity(alphas.len());
        for &alpha in alphas {
            let mut pipeline = VersionId::V4_5.pipeline();
            pipeline.selector = Selector::ManhattanOnScore { alpha };
            let games = play_boards(
                cell_boards,
                grid.timeout,
                |b| PolicyContext::for_pipeline(pipeline, &Models::default(), derive_seed(b.seed, &[VersionId::V4_5.code()])),
                |_| WinCounter::default(),
            )?;
            win_ratios.push(games.iter().filter(|w| w.0).count() as f64 / games.len().max(1) as f64);
        }
        let best_win_ratio = win_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tied: Vec<f64> = alphas.iter().zip(&win_ratios).filter(|(_, &w)| w == best_win_ratio).map(|(&a, _)| a).collect();
        let best_alpha = tied[(tied.len() - 1) / 2];
        rows.push(AlphaSweepRow { rows: r, cols: c, mines: n, win_ratios, best_alpha, best_win_ratio });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlphaFit {
    pub model: AlphaModel,
    pub r_squared: f64,
}

/// Ordinary least squares of the best α on (p, q, mine ratio, 1).
pub fn fit_alpha(rows: &[AlphaSweepRow]) -> Result<AlphaFit, TrainingError> {
    if rows.len() < 4 {
        return Err(TrainingError::TooFewRows { needed: 4, got: rows.len() });
    }
    let x = DMatrix::from_fn(rows.len(), 4, |i, j| match j {
        0 => rows[i].rows as f64,
        1 => rows[i].cols as f64,
        2 => rows[i].mine_ratio(),
        _ => 1.0,
    });
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.best_alpha));
    let svd = x.clone().svd(true, true);
    let max_sv = svd.singular_values.max();
    let tol = max_sv * 1e-10 * rows.len() as f64;
    if svd.rank(tol) < 4 {
        return Err(TrainingError::Singular);
    }
    let theta = svd.solve(&y, tol).map_err(|_| TrainingError::Singular)?;
    let fitted = &x * &theta;
    let mean = y.mean();
    let ss_res: f64 = y.iter().zip(fitted.iter()).map(|(a, b)| (a - b).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|a| (a - mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else if ss_res < 1e-18 { 1.0 } else { 0.0 };
    Ok(AlphaFit { model: AlphaModel { theta: [theta[0], theta[1], theta[2], theta[3]] }, r_squared })
}
