//! Self-play data generation and training for the learned versions.
//!
//! * classification: labelled (features, safe?) samples from v4.0 games,
//!   single-pass and iterative classifier training;
//! * alpha: win-ratio sweep over the score blend weight and its linear fit;
//! * qlearn: sub-state/return samples and Q-network training.

mod alpha;
mod classify;
mod corpus;
mod qlearn;

use std::time::Duration;

use rayon::prelude::*;
use thiserror::Error;

pub use alpha::{alpha_sweep, default_alphas, fit_alpha, AlphaFit, AlphaSweepRow};
pub use classify::{
    accuracy, collect_classification_data, collect_labeled, majority_baseline, to_corpus, train_classifier_iterative,
    train_classifier_single_pass, ClassifierReport, EpisodeReport, LabeledSample, EXTRA_CELLS,
};
pub use corpus::{read_corpus, write_corpus, Corpus};
pub use qlearn::{
    bootstrap_samples, collect_q_episodes, discounted_returns, immediate_reward, mean_predictor_mse, q_corpus, q_target,
    return_samples, train_qnet_iterative, train_qnet_single_pass, QConfig, QEpisode, QEpisodeReport, QPolicy, QReport,
    QSample, Q_TARGET_LIMIT,
};

use crate::engine::BoardConfig;
use crate::neural::NeuralError;
use crate::policies::{GameObserver, PolicyContext, PolicyError};
use crate::rng::derive_seed;

#[derive(Debug, Error)]
pub enum TrainingError {
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error("no training samples")]
    EmptyCorpus,
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("design matrix is singular")]
    Singular,
    #[error("corpus line {line}: {message}")]
    Corpus { line: usize, message: String },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Rows, columns and mines for a board of larger side `p`, side ratio
/// `dim_ratio` and mine density `mine_ratio`. The mine count is kept in
/// `1..p·q` so the first click always has a safe cell.
pub fn board_dims(p: usize, dim_ratio: f64, mine_ratio: f64) -> (usize, usize, usize) {
    let q = ((p as f64 * dim_ratio).round() as usize).max(1);
    let cells = p * q;
    let n = ((mine_ratio * cells as f64).round() as usize).clamp(1, cells.saturating_sub(1).max(1));
    (p, q, n)
}

/// Board configurations to self-play on.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid {
    pub board_sizes: Vec<usize>,
    pub dim_ratios: Vec<f64>,
    pub mine_ratios: Vec<f64>,
    pub games_per_cell: usize,
    pub seed_base: u64,
    pub timeout: Duration,
}

impl SweepGrid {
    /// Sizes 5 to 12, side ratios 0.5 and 1, mine densities 5% to 30%, 50
    /// games each.
    pub fn desk() -> Self {
        Self {
            board_sizes: (5..=12).collect(),
            dim_ratios: vec![0.5, 1.0],
            mine_ratios: vec![0.05, 0.10, 0.15, 0.20, 0.25, 0.30],
            games_per_cell: 50,
            seed_base: 11,
            timeout: Duration::from_secs(5),
        }
    }

    /// The 9×9 board with 10 mines.
    pub fn beginner(games: usize, seed_base: u64) -> Self {
        Self {
            board_sizes: vec![9],
            dim_ratios: vec![1.0],
            mine_ratios: vec![10.0 / 81.0],
            games_per_cell: games,
            seed_base,
            timeout: Duration::from_secs(5),
        }
    }

    /// Distinct (rows, cols, mines) cells in sweep order.
    pub fn cells(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for &p in &self.board_sizes {
            for &d in &self.dim_ratios {
                for &m in &self.mine_ratios {
                    let c = board_dims(p, d, m);
                    if !out.contains(&c) {
                        out.push(c);
                    }
                }
            }
        }
        out
    }

    /// Every game of the grid in (cell, game) order.
    pub fn boards(&self) -> Vec<BoardConfig> {
        self.cells()
            .into_iter()
            .flat_map(|(rows, cols, mines)| {
                (0..self.games_per_cell).map(move |g| BoardConfig {
                    rows,
                    cols,
                    mines,
                    seed: derive_seed(self.seed_base, &[rows as u64, cols as u64, mines as u64, g as u64]),
                })
            })
            .collect()
    }

    /// `count` boards for one training episode, cycling through the cells.
    pub fn episode_boards(&self, episode: usize, count: usize) -> Vec<BoardConfig> {
        let cells = self.cells();
        if cells.is_empty() {
            return Vec::new();
        }
        (0..count)
            .map(|g| {
                let (rows, cols, mines) = cells[(episode * count + g) % cells.len()];
                BoardConfig { rows, cols, mines, seed: derive_seed(self.seed_base, &[0xE915_0DE, episode as u64, g as u64]) }
            })
            .collect()
    }
}

/// Training hyper-parameters shared by both networks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Passes over the corpus; 1 for single-pass training.
    pub epochs: usize,
    /// Fraction held out from the end of the corpus.
    pub holdout: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { batch_size: 32, learning_rate: 1e-3, epochs: 1, holdout: 0.1, seed: 7 }
    }
}

/// Index where the held-out tail starts.
pub fn holdout_start(len: usize, fraction: f64) -> usize {
    let held = ((len as f64) * fraction).ceil() as usize;
    len - held.min(len)
}

/// Plays each board with a fresh context and observer, in parallel, and
/// returns the observers in board order.
pub(crate) fn play_boards<O, F, G>(boards: &[BoardConfig], timeout: Duration, make_ctx: F, make_obs: G) -> Result<Vec<O>, PolicyError>
where
    O: GameObserver + Send,
    F: Fn(&BoardConfig) -> Result<PolicyContext, PolicyError> + Sync,
    G: Fn(&BoardConfig) -> O + Sync,
{
    boards
        .par_iter()
        .map(|b| {
            let mut ctx = make_ctx(b)?;
            let mut obs = make_obs(b);
            crate::policies::play_game_observed(*b, &mut ctx, Some(timeout), &mut obs);
            Ok(obs)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_cells_and_boards() {
        let g = SweepGrid { games_per_cell: 3, ..SweepGrid::beginner(3, 1) };
        assert_eq!(g.cells(), vec![(9, 9, 10)]);
        let boards = g.boards();
        assert_eq!(boards.len(), 3);
        assert_ne!(boards[0].seed, boards[1].seed);
        assert_eq!(boards, g.boards());
    }

    #[test]
    fn desk_grid_is_playable() {
        let cells = SweepGrid::desk().cells();
        assert!(cells.iter().all(|&(p, q, n)| n >= 1 && n < p * q));
        assert!(cells.len() > 50);
    }

    #[test]
    fn holdout_is_the_tail() {
        assert_eq!(holdout_start(100, 0.1), 90);
        assert_eq!(holdout_start(5, 0.1), 4);
        assert_eq!(holdout_start(0, 0.1), 0);
    }

    #[test]
    fn episode_boards_cycle_cells() {
        let g = SweepGrid::desk();
        let b = g.episode_boards(0, 4);
        assert_eq!(b.len(), 4);
        assert_ne!((b[0].rows, b[0].cols, b[0].mines), (b[1].rows, b[1].cols, b[1].mines));
        assert_ne!(g.episode_boards(1, 4)[0].seed, b[0].seed);
    }
}
