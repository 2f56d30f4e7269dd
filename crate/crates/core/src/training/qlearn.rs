use std::sync::Arc;

use super::{holdout_start, play_boards, Corpus, SweepGrid, TrainConfig, TrainingError};
use crate::engine::{BoardConfig, GameState, Reveal};
use crate::heuristics::{extract_substate, AlphaModel};
use crate::neural::{train_epoch, Mlp, Optimizer};
use crate::policies::{GameObserver, GameResult, Models, MoveAnalysis, MoveDecision, PolicyContext, Selector, VersionId};
use crate::rng::{derive_seed, rng_from_seed};

/// Targets are clipped into the open range of the network's tanh output.
pub const Q_TARGET_LIMIT: f64 = 0.999;

/// Share of the safe cells opened by one action.
pub fn immediate_reward(opened: usize, p: usize, q: usize, n: usize) -> f64 {
    let safe = (p * q).saturating_sub(n);
    if safe == 0 {
        0.0
    } else {
        opened as f64 / safe as f64
    }
}

/// Linearly discounted returns: `G_t = Σ_{k≥t} r_k / (1 + c·(k−t))`.
pub fn discounted_returns(rewards: &[f64], c: f64) -> Vec<f64> {
    (0..rewards.len())
        .map(|t| rewards[t..].iter().enumerate().map(|(d, r)| r / (1.0 + c * d as f64)).sum())
        .collect()
}

/// One-step target `r + γ·max Q'`; pass 0 for a terminal step.
pub fn q_target(r: f64, gamma: f64, max_next_q: f64) -> f64 {
    r + gamma * max_next_q
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QConfig {
    /// Sub-state window side.
    pub sub: usize,
    /// Linear discount factor `c` of [`discounted_returns`].
    pub discount: f64,
    pub gamma: f64,
}

impl Default for QConfig {
    fn default() -> Self {
        Self { sub: 3, discount: 1.0, gamma: 0.9 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QSample {
    pub substate: Vec<f64>,
    pub target: f64,
}

/// The guesses of one game: the sub-state around each guessed cell and the
/// immediate reward it earned. A guess is credited with the cells it
/// opened plus those opened by the forced moves that followed it; a guess
/// that hits a mine earns 0.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QEpisode {
    pub substates: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub won: bool,
}

struct EpisodeRecorder {
    sub: usize,
    opened: Vec<usize>,
    lost: Vec<bool>,
    episode: QEpisode,
}

impl GameObserver for EpisodeRecorder {
    fn on_move(&mut self, _: &GameState, decision: &MoveDecision, analysis: &MoveAnalysis, reveals: &[Reveal], _: &GameState) {
        let opened: usize = reveals.iter().map(|r| r.opened).sum();
        let hit = reveals.iter().any(|r| r.hit_mine);
        if decision.is_probabilistic() {
            let (Some(&action), Some(field)) = (decision.uncovers.first(), analysis.field.as_ref()) else { return };
            self.episode.substates.push(extract_substate(field, action, self.sub).values);
            self.opened.push(opened);
            self.lost.push(hit);
        } else if let Some(last) = self.opened.last_mut() {
            *last += opened;
        }
    }

    fn on_finish(&mut self, state: &GameState, result: &GameResult) {
        let c = state.config();
        self.episode.rewards = self
            .opened
            .iter()
            .zip(&self.lost)
            .map(|(&o, &lost)| if lost { 0.0 } else { immediate_reward(o, c.rows, c.cols, c.mines) })
            .collect();
        self.episode.won = result.won;
    }
}

/// Which policy plays the data-collection games.
#[derive(Clone, Debug)]
pub enum QPolicy {
    /// Manhattan rule on the blended score with α from the fitted model.
    Base,
    /// The Q-network policy with the given network.
    Current(Arc<Mlp>),
}

pub fn collect_q_episodes(
    boards: &[BoardConfig],
    alpha: &AlphaModel,
    policy: &QPolicy,
    config: &QConfig,
    timeout: std::time::Duration,
) -> Result<Vec<QEpisode>, TrainingError> {
    let models = match policy {
        QPolicy::Base => Models::default(),
        QPolicy::Current(net) => Models { qnet: Some(net.clone()), alpha: Some(*alpha), ..Models::default() },
    };
    let observers = play_boards(
        boards,
        timeout,
        |b| {
            let seed = derive_seed(b.seed, &[VersionId::V6_0.code()]);
            let mut ctx = match policy {
                QPolicy::Base => {
                    let mut pipeline = VersionId::V4_5.pipeline();
                    pipeline.selector = Selector::ManhattanOnScore { alpha: alpha.predict(b.rows, b.cols, b.mine_ratio()) };
                    PolicyContext::for_pipeline(pipeline, &models, seed)?
                }
                QPolicy::Current(_) => PolicyContext::new(VersionId::V6_0, &models, seed)?,
            };
            ctx.sub = config.sub;
            Ok(ctx)
        },
        |_| EpisodeRecorder { sub: config.sub, opened: Vec::new(), lost: Vec::new(), episode: QEpisode::default() },
    )?;
    Ok(observers.into_iter().map(|o| o.episode).collect())
}

/// Samples whose targets are the linearly discounted returns.
pub fn return_samples(episodes: &[QEpisode], discount: f64) -> Vec<QSample> {
    episodes
        .iter()
        .flat_map(|e| {
            let returns = discounted_returns(&e.rewards, discount);
            e.substates.iter().zip(returns).map(|(s, g)| QSample {
                substate: s.clone(),
                target: g.clamp(-Q_TARGET_LIMIT, Q_TARGET_LIMIT),
            })
        })
        .collect()
}

/// Samples whose targets bootstrap from `model`: the next guess's value
/// stands in for `max Q'`, and the last guess of a game is terminal.
pub fn bootstrap_samples(episodes: &[QEpisode], model: &Mlp, gamma: f64) -> Vec<QSample> {
    episodes
        .iter()
        .flat_map(|e| {
            (0..e.substates.len()).map(move |t| {
                let next = e.substates.get(t + 1).map_or(0.0, |s| model.eval(s));
                QSample {
                    substate: e.substates[t].clone(),
                    target: q_target(e.rewards[t], gamma, next).clamp(-Q_TARGET_LIMIT, Q_TARGET_LIMIT),
                }
            })
        })
        .collect()
}

pub fn q_corpus(samples: &[QSample]) -> Corpus {
    Corpus { inputs: samples.iter().map(|s| s.substate.clone()).collect(), targets: samples.iter().map(|s| s.target).collect() }
}

/// Squared error of predicting `train_targets`' mean on `targets`.
pub fn mean_predictor_mse(train_targets: &[f64], targets: &[f64]) -> f64 {
    if targets.is_empty() {
        return f64::NAN;
    }
    let mean = train_targets.iter().sum::<f64>() / train_targets.len().max(1) as f64;
    targets.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / targets.len() as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct QReport {
    pub train_samples: usize,
    pub heldout_samples: usize,
    pub train_loss: f64,
    pub heldout_mse: f64,
    /// Held-out error of always predicting the training mean.
    pub mean_predictor_mse: f64,
}

/// Fits standardization on the training part, trains for `config.epochs`
/// passes and evaluates on the held-out tail.
pub fn train_qnet_single_pass(samples: &[QSample], model: &mut Mlp, config: &TrainConfig) -> Result<QReport, TrainingError> {
    let corpus = q_corpus(samples);
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
    let heldout_mse = if held_x.is_empty() { f64::NAN } else { model.loss(held_x, held_y)? };
    Ok(QReport {
        train_samples: train_x.len(),
        heldout_samples: held_x.len(),
        train_loss,
        heldout_mse,
        mean_predictor_mse: mean_predictor_mse(train_y, held_y),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct QEpisodeReport {
    pub episode: usize,
    pub samples: usize,
    pub wins: usize,
    pub games: usize,
    pub loss: f64,
    pub updates: u64,
}

/// Iterative Q training: each episode plays `batch_games` boards with the
/// current network's policy, builds one-step bootstrapped targets from the
/// same network and makes one pass over them.
#[allow(clippy::too_many_arguments)]
pub fn train_qnet_iterative(
    model: &mut Mlp,
    alpha: &AlphaModel,
    grid: &SweepGrid,
    episodes: usize,
    batch_games: usize,
    q: &QConfig,
    config: &TrainConfig,
    mut on_episode: impl FnMut(&Mlp, &QEpisodeReport) -> Result<(), TrainingError>,
) -> Result<Vec<QEpisodeReport>, TrainingError> {
    if episodes == 0 {
        return Err(TrainingError::Invalid("episodes must be at least 1".into()));
    }
    model.meta.learning_rate = config.learning_rate;
    let mut opt = Optimizer::for_model(model);
    let mut rng = rng_from_seed(config.seed);
    let mut reports = Vec::with_capacity(episodes);
    for episode in 0..episodes {
        let boards = grid.episode_boards(episode, batch_games);
        let played = collect_q_episodes(&boards, alpha, &QPolicy::Current(Arc::new(model.clone())), q, grid.timeout)?;
        let corpus = q_corpus(&bootstrap_samples(&played, model, q.gamma));
        let loss = if corpus.is_empty() {
            f64::NAN
        } else {
            train_epoch(model, &mut opt, &corpus.inputs, &corpus.targets, config.batch_size, &mut rng)?
        };
        let report = QEpisodeReport {
            episode,
            samples: corpus.len(),
            wins: played.iter().filter(|e| e.won).count(),
            games: boards.len(),
            loss,
            updates: model.meta.updates,
        };
        on_episode(model, &report)?;
        reports.push(report);
    }
    Ok(reports)
}
