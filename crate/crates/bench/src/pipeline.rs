//! End-to-end training of every learned version into a model directory.

use std::path::Path;

use minesweep_core::heuristics::FeatureVector;
use minesweep_core::neural::{build_classifier, build_qnet, save_alpha, save_model, Mlp};
use minesweep_core::policies::{model_file, VersionId, ALPHA_FILE};
use minesweep_core::rng::rng_from_seed;
use minesweep_core::training::{
    alpha_sweep, collect_classification_data, collect_q_episodes, default_alphas, fit_alpha, return_samples,
    train_classifier_iterative, train_classifier_single_pass, train_qnet_iterative, train_qnet_single_pass,
    AlphaFit, AlphaSweepRow, ClassifierReport, EpisodeReport, QConfig, QEpisodeReport, QPolicy, QReport, SweepGrid, TrainConfig,
    TrainingError,
};

/// Every knob of the training run. [`TrainPlan::desk`] finishes in about a
/// minute on one core.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainPlan {
    pub classify_grid: SweepGrid,
    pub classify: TrainConfig,
    pub classify_episodes: usize,
    pub classify_batch_games: usize,
    pub classify_iterative: TrainConfig,
    pub alpha_grid: SweepGrid,
    pub alphas: Vec<f64>,
    pub q_grid: SweepGrid,
    pub q: QConfig,
    pub q_train: TrainConfig,
    pub q_episodes: usize,
    pub q_batch_games: usize,
    pub q_iterative: TrainConfig,
    pub init_seed: u64,
}

impl TrainPlan {
    pub fn desk() -> Self {
        Self {
            classify_grid: SweepGrid { games_per_cell: 25, ..SweepGrid::desk() },
            classify: TrainConfig { learning_rate: 3e-3, ..TrainConfig::default() },
            classify_episodes: 100,
            classify_batch_games: 20,
            classify_iterative: TrainConfig::default(),
            alpha_grid: SweepGrid {
                board_sizes: (5..=10).collect(),
                dim_ratios: vec![0.5, 1.0],
                mine_ratios: vec![0.05, 0.10, 0.15, 0.20, 0.25],
                games_per_cell: 20,
                ..SweepGrid::desk()
            },
            alphas: (0..=10).map(|k| k as f64 / 10.0).collect(),
            q_grid: SweepGrid { games_per_cell: 200, ..SweepGrid::desk() },
            q: QConfig::default(),
            q_train: TrainConfig::default(),
            q_episodes: 50,
            q_batch_games: 20,
            q_iterative: TrainConfig { learning_rate: 3e-4, ..TrainConfig::default() },
            init_seed: 1,
        }
    }

    /// The α grid of the published protocol: steps of 1/30, 100 games per
    /// configuration.
    pub fn with_full_alpha_sweep(mut self) -> Self {
        self.alphas = default_alphas();
        self.alpha_grid.games_per_cell = 100;
        self
    }
}

#[derive(Clone, Debug)]
pub struct ClassifierRun {
    pub samples: usize,
    pub single_pass: ClassifierReport,
    pub episodes: Vec<EpisodeReport>,
    pub single_pass_model: Mlp,
    pub iterative_model: Mlp,
}

/// v5.0 and v5.5: collect, train one pass, then iterate from the result.
/// With zero episodes both models are the single-pass one.
pub fn train_classifiers(plan: &TrainPlan) -> Result<ClassifierRun, TrainingError> {
    let samples = collect_classification_data(&plan.classify_grid)?;
    let mut model = build_classifier(FeatureVector::WIDTH);
    model.init_weights(&mut rng_from_seed(plan.init_seed));
    let single_pass = train_classifier_single_pass(&samples, &mut model, &plan.classify)?;
    let single_pass_model = model.clone();
    let episodes = if plan.classify_episodes == 0 {
        Vec::new()
    } else {
        train_classifier_iterative(
            &mut model,
            &plan.classify_grid,
            plan.classify_episodes,
            plan.classify_batch_games,
            &plan.classify_iterative,
            |_, _| Ok(()),
        )?
    };
    Ok(ClassifierRun { samples: samples.len(), single_pass, episodes, single_pass_model, iterative_model: model })
}

#[derive(Clone, Debug)]
pub struct QRun {
    pub alpha: AlphaFit,
    pub samples: usize,
    pub single_pass: QReport,
    pub episodes: Vec<QEpisodeReport>,
    pub single_pass_model: Mlp,
    pub iterative_model: Mlp,
}

/// α sweep and fit, then v6.5 (one pass over base-policy returns) and v6.0
/// (v6.5 refined by iterative episodes).
pub fn train_qnets(plan: &TrainPlan) -> Result<QRun, TrainingError> {
    let rows = alpha_sweep(&plan.alpha_grid, &plan.alphas)?;
    let alpha = fit_alpha(&rows)?;
    let episodes = collect_q_episodes(&plan.q_grid.boards(), &alpha.model, &QPolicy::Base, &plan.q, plan.q_grid.timeout)?;
    let samples = return_samples(&episodes, plan.q.discount);
    let mut model = build_qnet(plan.q.sub);
    model.init_weights(&mut rng_from_seed(plan.init_seed));
    let single_pass = train_qnet_single_pass(&samples, &mut model, &plan.q_train)?;
    let single_pass_model = model.clone();
    let episodes = if plan.q_episodes == 0 {
        Vec::new()
    } else {
        train_qnet_iterative(
            &mut model,
            &alpha.model,
            &plan.q_grid,
            plan.q_episodes,
            plan.q_batch_games,
            &plan.q,
            &plan.q_iterative,
            |_, _| Ok(()),
        )?
    };
    Ok(QRun { alpha, samples: samples.len(), single_pass, episodes, single_pass_model, iterative_model: model })
}

/// Writes the five model files a learned-version benchmark needs.
pub fn save_models(dir: &Path, classifiers: &ClassifierRun, qnets: &QRun) -> Result<(), TrainingError> {
    std::fs::create_dir_all(dir)?;
    let file = |v| dir.join(model_file(v).expect("learned version"));
    save_model(&classifiers.single_pass_model, file(VersionId::V5_0))?;
    save_model(&classifiers.iterative_model, file(VersionId::V5_5))?;
    save_model(&qnets.iterative_model, file(VersionId::V6_0))?;
    save_model(&qnets.single_pass_model, file(VersionId::V6_5))?;
    save_alpha(&qnets.alpha.model, dir.join(ALPHA_FILE))?;
    Ok(())
}

/// α sweep table: `p,q,n,best_alpha,best_win_ratio` and one win-ratio
/// column per swept α.
pub fn write_alpha_table<W: std::io::Write>(out: W, alphas: &[f64], rows: &[AlphaSweepRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["p", "q", "n", "best_alpha", "best_win_ratio"].map(String::from).to_vec();
    header.extend(alphas.iter().map(|a| format!("alpha_{a:.4}")));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.rows.to_string(),
            r.cols.to_string(),
            r.mines.to_string(),
            format!("{:.4}", r.best_alpha),
            format!("{:.4}", r.best_win_ratio),
        ];
        rec.extend(r.win_ratios.iter().map(|v| format!("{v:.4}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use minesweep_core::policies::Models;

    use super::*;

    fn tiny() -> TrainPlan {
        let small = SweepGrid { board_sizes: vec![6, 8], dim_ratios: vec![1.0], mine_ratios: vec![0.15], games_per_cell: 6, ..SweepGrid::desk() };
        TrainPlan {
            classify_grid: small.clone(),
            classify_episodes: 2,
            classify_batch_games: 3,
            alpha_grid: SweepGrid { board_sizes: vec![5, 6, 7, 8], dim_ratios: vec![0.5, 1.0], ..small.clone() },
            alphas: vec![0.0, 0.5, 1.0],
            q_grid: small,
            q_episodes: 2,
            q_batch_games: 3,
            ..TrainPlan::desk()
        }
    }

    #[test]
    fn trains_and_saves_every_model() {
        let plan = tiny();
        let c = train_classifiers(&plan).unwrap();
        let q = train_qnets(&plan).unwrap();
        assert!(c.samples > 0 && q.samples > 0);
        assert!(c.iterative_model.meta.updates > c.single_pass_model.meta.updates);
        let dir = tempfile::tempdir().unwrap();
        save_models(dir.path(), &c, &q).unwrap();
        for v in VersionId::ALL.iter().filter(|v| v.is_learned()) {
            Models::load_for(dir.path(), *v).unwrap();
        }
    }

    #[test]
    fn alpha_table_has_a_column_per_alpha() {
        let rows = vec![AlphaSweepRow { rows: 6, cols: 3, mines: 2, win_ratios: vec![0.5, 0.75], best_alpha: 1.0, best_win_ratio: 0.75 }];
        let mut out = Vec::new();
        write_alpha_table(&mut out, &[0.0, 1.0], &rows).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "p,q,n,best_alpha,best_win_ratio,alpha_0.0000,alpha_1.0000\n6,3,2,1.0000,0.7500,0.5000,0.7500\n"
        );
    }

    #[test]
    fn zero_episodes_keep_the_single_pass_models() {
        let plan = TrainPlan { classify_episodes: 0, q_episodes: 0, ..tiny() };
        let c = train_classifiers(&plan).unwrap();
        assert!(c.episodes.is_empty());
        assert_eq!(c.iterative_model, c.single_pass_model);
    }
}
