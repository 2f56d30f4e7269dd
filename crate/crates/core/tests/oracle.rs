//! Exhaustive 2^m checks of the constraint solvers on small frontiers.

use std::collections::BTreeSet;

use minesweep_core::csp::{
    dss, enumerate_backtracking, enumerate_dsscsp, probabilities, Assignment, ConstraintSystem, TraversalLimits,
};
use minesweep_core::engine::{BoardConfig, GameState, Reveal};
use minesweep_core::policies::{play_game_observed, GameObserver, MoveAnalysis, MoveDecision, Models, PolicyContext, VersionId};
use minesweep_core::rng::{bounded, rng_from_seed};

const MAX_VARS: usize = 16;

fn oracle(system: &ConstraintSystem) -> BTreeSet<Assignment> {
    let m = system.num_vars();
    let matrix = system.dense_matrix();
    let targets = system.targets();
    (0u32..1 << m)
        .filter(|mask| {
            matrix.iter().zip(targets).all(|(row, &t)| {
                row.iter().enumerate().filter(|&(j, &a)| a == 1 && mask >> j & 1 == 1).count() as i32 == t
            })
        })
        .map(|mask| Assignment::from_bools(&(0..m).map(|j| mask >> j & 1 == 1).collect::<Vec<_>>()))
        .collect()
}

struct Frontiers {
    out: Vec<ConstraintSystem>,
}

impl GameObserver for Frontiers {
    fn on_move(&mut self, _: &GameState, _: &MoveDecision, analysis: &MoveAnalysis, _: &[Reveal], _: &GameState) {
        if let Some(s) = &analysis.system {
            if (1..=MAX_VARS).contains(&s.num_vars()) {
                self.out.push(s.clone());
            }
        }
    }
}

/// Frontiers seen during real games on assorted boards, one per game, plus
/// planted random systems of the same sizes.
fn frontiers(count: usize) -> Vec<ConstraintSystem> {
    let mut rng = rng_from_seed(2024);
    let mut out = Vec::new();
    let mut seed = 0;
    while out.len() < count / 2 {
        seed += 1;
        let rows = 5 + bounded(&mut rng, 8) as usize;
        let cols = 5 + bounded(&mut rng, 8) as usize;
        let mines = (rows * cols) * (8 + bounded(&mut rng, 14) as usize) / 100;
        let config = BoardConfig::new(rows, cols, mines.max(1), seed).unwrap();
        let mut ctx = PolicyContext::new(VersionId::V3_0, &Models::default(), seed).unwrap();
        let mut obs = Frontiers { out: Vec::new() };
        play_game_observed(config, &mut ctx, None, &mut obs);
        if !obs.out.is_empty() {
            let k = bounded(&mut rng, obs.out.len() as u64) as usize;
            out.push(obs.out.swap_remove(k));
        }
    }
    while out.len() < count {
        let m = 1 + bounded(&mut rng, MAX_VARS as u64) as usize;
        let rows = 1 + bounded(&mut rng, m as u64 + 2) as usize;
        let hidden: Vec<bool> = (0..m).map(|_| bounded(&mut rng, 3) == 0).collect();
        let matrix: Vec<Vec<u8>> =
            (0..rows).map(|_| (0..m).map(|_| (bounded(&mut rng, 10) < 3) as u8).collect()).collect();
        let targets: Vec<i32> =
            matrix.iter().map(|r| r.iter().zip(&hidden).filter(|(&a, &x)| a == 1 && x).count() as i32).collect();
        out.push(ConstraintSystem::from_dense(&matrix, &targets).unwrap());
    }
    out
}

#[test]
fn row_rules_only_fix_backbone_variables() {
    for (k, system) in frontiers(200).iter().enumerate() {
        let truth = oracle(system);
        assert!(!truth.is_empty(), "frontier {k} unsatisfiable");
        let mut reduced = system.clone();
        let det = dss(&mut reduced).unwrap();
        for &(j, mine) in &det.entries {
            assert!(truth.iter().all(|a| a.get(j) == mine), "frontier {k}: variable {j} is not forced to {mine}");
        }
    }
}

#[test]
fn uncapped_enumerators_find_exactly_the_oracle_set() {
    let mut rng = rng_from_seed(5);
    for (k, system) in frontiers(200).iter().enumerate() {
        let truth = oracle(system);
        let bt = enumerate_backtracking(system, &TraversalLimits::unlimited());
        let ds = enumerate_dsscsp(system, &TraversalLimits::unlimited(), &mut rng);
        assert!(!bt.truncated && !ds.truncated);
        let bt_set: BTreeSet<_> = bt.iter().collect();
        let ds_set: BTreeSet<_> = ds.iter().collect();
        assert_eq!(bt.len(), bt_set.len(), "frontier {k}: backtracking repeats a solution");
        assert_eq!(ds.len(), ds_set.len(), "frontier {k}: dsscsp repeats a solution");
        assert_eq!(bt_set, truth, "frontier {k}: backtracking");
        assert_eq!(ds_set, truth, "frontier {k}: dsscsp");
    }
}

#[test]
fn probabilities_are_oracle_frequencies() {
    let mut rng = rng_from_seed(6);
    for (k, system) in frontiers(200).iter().enumerate() {
        let truth = oracle(system);
        let expected: Vec<f64> = (0..system.num_vars())
            .map(|j| truth.iter().filter(|a| a.get(j)).count() as f64 / truth.len() as f64)
            .collect();
        let ds = enumerate_dsscsp(system, &TraversalLimits::unlimited(), &mut rng);
        assert_eq!(probabilities(&ds).unwrap(), expected, "frontier {k}");
        let bt = enumerate_backtracking(system, &TraversalLimits::unlimited());
        assert_eq!(probabilities(&bt).unwrap(), expected, "frontier {k}");
    }
}

#[test]
fn unsatisfiable_systems_have_no_solutions() {
    let system = ConstraintSystem::from_dense(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 1, 1]], &[2, 2, 2]).unwrap();
    assert!(oracle(&system).is_empty());
    assert!(enumerate_backtracking(&system, &TraversalLimits::unlimited()).is_empty());
    assert!(enumerate_dsscsp(&system, &TraversalLimits::unlimited(), &mut rng_from_seed(1)).is_empty());
}
