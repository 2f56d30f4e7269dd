use std::sync::Arc;

use super::{holdout_start, play_boards, Corpus, SweepGrid, TrainConfig, TrainingError};
use crate::engine::{BoardConfig, CellView, Coord, GameState, Reveal};
use crate::heuristics::featurize;
use crate::neural::{train_epoch, Mlp, Optimizer};
use crate::policies::{FEATURE_OFF_FRONTIER, GameObserver, GameResult, Models, MoveAnalysis, MoveDecision, PolicyContext, VersionId};
use crate::rng::{bounded, derive_seed, rng_from_seed, GameRng};

/// Random covered cells labelled alongside each guessed cell.
pub const EXTRA_CELLS: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSample {
    pub features: Vec<f64>,
    /// 1 when the cell is safe.
    pub label: f64,
    pub cell: Coord,
}

struct LabelCollector {
    rng: GameRng,
    samples: Vec<LabeledSample>,
    wins: usize,
}

impl GameObserver for LabelCollector {
    fn on_move(&mut self, before: &GameState, decision: &MoveDecision, analysis: &MoveAnalysis, _: &[Reveal], _: &GameState) {
        if !decision.is_probabilistic() {
            return;
        }
        let (Some(&action), Some(system)) = (decision.uncovers.first(), analysis.system.as_ref()) else { return };
        let frontier = &analysis.probabilities[..system.num_vars().min(analysis.probabilities.len())];
        let mut others: Vec<Coord> =
            before.coords().filter(|&c| c != action && before.cell(c) == CellView::Covered).collect();
        let mut cells = vec![action];
        for _ in 0..EXTRA_CELLS.min(others.len()) {
            let k = bounded(&mut self.rng, others.len() as u64) as usize;
            cells.push(others.swap_remove(k));
        }
        for c in cells {
            if let Ok(f) = featurize(before, system, frontier, c, FEATURE_OFF_FRONTIER) {
                self.samples.push(LabeledSample { features: f.to_vec(), label: if before.is_mine(c) { 0.0 } else { 1.0 }, cell: c });
            }
        }
    }

    fn on_finish(&mut self, _: &GameState, result: &GameResult) {
        self.wins += result.won as usize;
    }
}

/// Plays `boards` with `version` and labels, at every guess, the guessed
/// cell and up to [`EXTRA_CELLS`] random covered cells against the hidden
/// layout. Returns the samples in board order and the number of wins.
pub fn collect_labeled(
    boards: &[BoardConfig],
    version: VersionId,
    models: &Models,
    timeout: std::time::Duration,
) -> Result<(Vec<LabeledSample>, usize), TrainingError> {
    let observers = play_boards(
        boards,
        timeout,
        |b| PolicyContext::new(version, models, derive_seed(b.seed, &[version.code()])),
        |b| LabelCollector { rng: rng_from_seed(derive_seed(b.seed, &[0x1ABE1])), samples: Vec::new(), wins: 0 },
    )?;
    let wins = observers.iter().map(|o| o.wins).sum();
    Ok((observers.into_iter().flat_map(|o| o.samples).collect(), wins))
}

/// Classification corpus from v4.0 self-play over `grid`.
pub fn collect_classification_data(grid: &SweepGrid) -> Result<Vec<LabeledSample>, TrainingError> {
    Ok(collect_labeled(&grid.boards(), VersionId::V4_0, &Models::default(), grid.timeout)?.0)
}

pub fn to_corpus(samples: &[LabeledSample]) -> Corpus {
    Corpus { inputs: samples.iter().map(|s| s.features.clone()).collect(), targets: samples.iter().map(|s| s.label).collect() }
}

/// Fraction of `inputs` whose thresholded output matches the label.
pub fn accuracy(model: &Mlp, inputs: &[Vec<f64>], labels: &[f64]) -> f64 {
    if inputs.is_empty() {
        return 0.0;
    }
    let hits = inputs.iter().zip(labels).filter(|(x, &y)| (model.eval(x) >= 0.5) == (y >= 0.5)).count();
    hits as f64 / inputs.len() as f64
}

/// Accuracy of always answering the more frequent label.
pub fn majority_baseline(labels: &[f64]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let ones = labels.iter().filter(|&&y| y >= 0.5).count();
    ones.max(labels.len() - ones) as f64 / labels.len() as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierReport {
    pub train_samples: usize,
    pub heldout_samples: usize,
    pub train_loss: f64,
    pub heldout_loss: f64,
    pub heldout_accuracy: f64,
    pub majority_baseline: f64,
}

/// Fits input standardization on the training part, then trains for
/// `config.epochs` passes (one for single-pass training) and evaluates on
/// the held-out tail.
pub fn train_classifier_single_pass(
    samples: &[LabeledSample],
    model: &mut Mlp,
    config: &TrainConfig,
) -> Result<ClassifierReport, TrainingError> {
    let corpus = to_corpus(samples);
    if corpus.is_empty() {
        return Err(TrainingError::EmptyCorpus);
    }
    let split = holdout_start(corpus.len(), config.holdout).max(1);
    let (train_x, held_x) = corpus.inputs.split_at(split);
    let (train_y, held_y) = corpus.targets.split_at(split);
    model.fit_standardization(train_x);
    model.meta.learning_rate = config.learning_rate;
    let mut opt = Optimizer::for_model(model);
    let mut rng = rng_from_seed(config.seed);
    let mut train_loss = f64::NAN;
    for _ in 0..config.epochs.max(1) {
        train_loss = train_epoch(model, &mut opt, train_x, train_y, config.batch_size, &mut rng)?;
    }
    let (heldout_loss, heldout_accuracy) =
        if held_x.is_empty() { (f64::NAN, f64::NAN) } else { (model.loss(held_x, held_y)?, accuracy(model, held_x, held_y)) };
    Ok(ClassifierReport {
        train_samples: train_x.len(),
        heldout_samples: held_x.len(),
        train_loss,
        heldout_loss,
        heldout_accuracy,
        majority_baseline: majority_baseline(held_y),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeReport {
    pub episode: usize,
    pub samples: usize,
    pub wins: usize,
    pub games: usize,
    /// Mean batch loss of the episode's pass; NaN when no sample was drawn.
    pub loss: f64,
    pub updates: u64,
}

/// Iterative classification: each episode plays `batch_games` boards with
/// the current model as the v5.5 policy, then makes one training pass over
/// the samples those games produced. The model keeps its standardization,
/// so start from a trained (or at least standardized) network.
/// `on_episode` runs after every episode, for example to save weights.
pub fn train_classifier_iterative(
    model: &mut Mlp,
    grid: &SweepGrid,
    episodes: usize,
    batch_games: usize,
    config: &TrainConfig,
    mut on_episode: impl FnMut(&Mlp, &EpisodeReport) -> Result<(), TrainingError>,
) -> Result<Vec<EpisodeReport>, TrainingError> {
    if episodes == 0 {
        return Err(TrainingError::Invalid("episodes must be at least 1".into()));
    }
    model.meta.learning_rate = config.learning_rate;
    let mut opt = Optimizer::for_model(model);
    let mut rng = rng_from_seed(config.seed);
    let mut reports = Vec::with_capacity(episodes);
    for episode in 0..episodes {
        let boards = grid.episode_boards(episode, batch_games);
        let models = Models { classifier: Some(Arc::new(model.clone())), ..Models::default() };
        let (samples, wins) = collect_labeled(&boards, VersionId::V5_5, &models, grid.timeout)?;
        let corpus = to_corpus(&samples);
        let loss = if corpus.is_empty() {
            f64::NAN
        } else {
            train_epoch(model, &mut opt, &corpus.inputs, &corpus.targets, config.batch_size, &mut rng)?
        };
        let report =
            EpisodeReport { episode, samples: corpus.len(), wins, games: boards.len(), loss, updates: model.meta.updates };
        on_episode(model, &report)?;
        reports.push(report);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristics::FeatureVector;
    use crate::neural::build_classifier;

    fn small_grid() -> SweepGrid {
        SweepGrid { board_sizes: vec![6, 8], dim_ratios: vec![1.0], mine_ratios: vec![0.15, 0.2], games_per_cell: 8, ..SweepGrid::desk() }
    }

    #[test]
    fn labels_match_the_layout() {
        let boards = small_grid().boards();
        let (samples, _) = collect_labeled(&boards[..6], VersionId::V4_0, &Models::default(), small_grid().timeout).unwrap();
        assert!(!samples.is_empty());
        for s in &samples {
            assert_eq!(s.features.len(), FeatureVector::WIDTH);
            assert!(s.label == 0.0 || s.label == 1.0);
            assert_eq!(s.features[3] as usize, s.cell.row);
            assert_eq!(s.features[4] as usize, s.cell.col);
        }
    }

    #[test]
    fn deterministic_only_game_gives_no_samples() {
        // The opening is the only safe cell.
        let b = BoardConfig { rows: 1, cols: 2, mines: 1, seed: 3 };
        let (samples, wins) = collect_labeled(&[b], VersionId::V4_0, &Models::default(), small_grid().timeout).unwrap();
        assert!(samples.is_empty());
        assert_eq!(wins, 1);
    }

    #[test]
    fn collection_is_reproducible() {
        let g = small_grid();
        let a = collect_classification_data(&g).unwrap();
        assert_eq!(a, collect_classification_data(&g).unwrap());
    }

    #[test]
    fn all_safe_corpus_predicts_safe() {
        let samples: Vec<LabeledSample> = (0..400)
            .map(|k| LabeledSample {
                features: (0..FeatureVector::WIDTH).map(|d| ((k * 7 + d * 3) % 11) as f64).collect(),
                label: 1.0,
                cell: Coord::new(0, 0),
            })
            .collect();
        let mut m = build_classifier(FeatureVector::WIDTH);
        m.init_weights(&mut rng_from_seed(1));
        let cfg = TrainConfig { epochs: 5, learning_rate: 1e-2, ..TrainConfig::default() };
        train_classifier_single_pass(&samples, &mut m, &cfg).unwrap();
        assert!(samples.iter().all(|s| m.eval(&s.features) >= 0.9));
    }

    #[test]
    fn single_pass_is_bit_reproducible() {
        let samples = collect_classification_data(&small_grid()).unwrap();
        let run = || {
            let mut m = build_classifier(FeatureVector::WIDTH);
            m.init_weights(&mut rng_from_seed(4));
            let r = train_classifier_single_pass(&samples, &mut m, &TrainConfig::default()).unwrap();
            (m, r)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn iterative_episodes_advance_updates() {
        let samples = collect_classification_data(&small_grid()).unwrap();
        let mut m = build_classifier(FeatureVector::WIDTH);
        m.init_weights(&mut rng_from_seed(4));
        train_classifier_single_pass(&samples, &mut m, &TrainConfig::default()).unwrap();
        let mut seen = Vec::new();
        let reports = train_classifier_iterative(&mut m, &small_grid(), 3, 4, &TrainConfig::default(), |model, r| {
            seen.push(model.meta.updates);
            assert_eq!(r.updates, model.meta.updates);
            Ok(())
        })
        .unwrap();
        assert_eq!(reports.len(), 3);
        assert!(seen.windows(2).all(|w| w[1] > w[0]));
        assert!(train_classifier_iterative(&mut m, &small_grid(), 0, 4, &TrainConfig::default(), |_, _| Ok(())).is_err());
    }

    #[test]
    fn baseline_counts_the_majority() {
        assert_eq!(majority_baseline(&[1.0, 1.0, 0.0, 1.0]), 0.75);
        assert_eq!(majority_baseline(&[0.0, 0.0, 1.0]), 2.0 / 3.0);
    }
}
