//! Constraint view of a Minesweeper position.
//!
//! Every uncovered number gives one equation over its covered neighbours, so
//! the whole frontier is a 0/1 system `A·x = N`. This module extracts that
//! system, finds variables forced by simple row rules ([`dss`]), enumerates the
//! solution set either by plain backtracking or by backtracking with the row
//! rules applied at every node ([`enumerate_dsscsp`]), and turns a solution set
//! into per-variable mine probabilities.

mod dss;
mod enumerate;
mod fixture;
mod system;

use thiserror::Error;

use crate::engine::{Coord, GameState};

pub use dss::{dss, DeterminedList, DSS_MAX_PASSES};
pub use enumerate::{
    enumerate_backtracking, enumerate_backtracking_until, enumerate_dsscsp, enumerate_dsscsp_until,
    SearchStats, SolutionSet, TraversalLimits,
};
pub use system::{ConstraintSystem, Variable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CspError {
    #[error("constraints contradict each other{}", .cell.map(|c| format!(" at {c}")).unwrap_or_default())]
    Contradiction { cell: Option<Coord> },
    #[error("malformed system: {0}")]
    Shape(String),
    #[error("fixture line {line}: {message}")]
    Fixture { line: usize, message: String },
    #[error("probabilities need at least one solution")]
    EmptySolutionSet,
}

/// One 0/1 value per variable, packed into words.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    words: Vec<u64>,
    len: usize,
}

impl Assignment {
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn from_bools(values: &[bool]) -> Self {
        let mut a = Self::zeros(values.len());
        for (j, &v) in values.iter().enumerate() {
            a.set(j, v);
        }
        a
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, j: usize) -> bool {
        self.words[j / 64] >> (j % 64) & 1 == 1
    }

    pub fn set(&mut self, j: usize, value: bool) {
        let bit = 1u64 << (j % 64);
        if value {
            self.words[j / 64] |= bit;
        } else {
            self.words[j / 64] &= !bit;
        }
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|j| self.get(j)).collect()
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

pub fn extract_constraints(state: &GameState) -> Result<ConstraintSystem, CspError> {
    ConstraintSystem::extract(state)
}

/// Fraction of solutions in which each variable is a mine.
pub fn probabilities(solutions: &SolutionSet) -> Result<Vec<f64>, CspError> {
    let s = solutions.len();
    if s == 0 {
        return Err(CspError::EmptySolutionSet);
    }
    let counts = solutions.mine_counts();
    Ok(counts.into_iter().map(|c| c as f64 / s as f64).collect())
}

pub fn feasible(system: &ConstraintSystem) -> bool {
    system.feasible()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::CellView;

    fn sys(a: &[&[u8]], n: &[i32]) -> ConstraintSystem {
        ConstraintSystem::from_dense(&a.iter().map(|r| r.to_vec()).collect::<Vec<_>>(), n).unwrap()
    }

    #[test]
    fn extract_single_row() {
        // 1x3, mine on the right; opening the centre shows a 1.
        let mut g = GameState::with_layout(1, 3, &[Coord::new(0, 2)]).unwrap();
        g.uncover(Coord::new(0, 1)).unwrap();
        assert_eq!(g.cell(Coord::new(0, 1)), CellView::Uncovered(1));
        let s = extract_constraints(&g).unwrap();
        assert_eq!(s.dense_matrix(), vec![vec![1, 1]]);
        assert_eq!(s.targets(), &[1]);
        assert_eq!(s.coords(), vec![Coord::new(0, 0), Coord::new(0, 2)]);
    }

    #[test]
    fn extract_with_nothing_open_is_empty() {
        let g = GameState::with_layout(3, 3, &[Coord::new(0, 0)]).unwrap();
        let s = extract_constraints(&g).unwrap();
        assert_eq!(s.num_rows(), 0);
        assert!(s.is_empty());
    }

    #[test]
    fn extract_subtracts_flags() {
        // 3x3, mines at (0,0) and (0,2). Opening the bottom centre floods the
        // lower two rows and leaves (0,1) and (0,2) covered next to a flag.
        let mut g = GameState::with_layout(3, 3, &[Coord::new(0, 0), Coord::new(0, 2)]).unwrap();
        g.toggle_flag(Coord::new(0, 0)).unwrap();
        g.uncover(Coord::new(2, 1)).unwrap();
        assert_eq!(g.cell(Coord::new(1, 1)), CellView::Uncovered(2));
        let s = extract_constraints(&g).unwrap();
        assert_eq!(s.coords(), vec![Coord::new(0, 1), Coord::new(0, 2)]);
        // Rows for (1,0), (1,1), (1,2) in board order.
        assert_eq!(s.targets(), &[0, 1, 1]);
        assert_eq!(s.dense_matrix(), vec![vec![1, 0], vec![1, 1], vec![1, 1]]);
    }

    #[test]
    fn extract_reports_inconsistent_flags() {
        let mut g = GameState::with_layout(1, 3, &[Coord::new(0, 2)]).unwrap();
        g.uncover(Coord::new(0, 1)).unwrap();
        g.toggle_flag(Coord::new(0, 0)).unwrap();
        g.toggle_flag(Coord::new(0, 2)).unwrap();
        assert!(matches!(extract_constraints(&g), Err(CspError::Contradiction { .. })));
    }

    #[test]
    fn reduce_mine_and_safe() {
        let mut s = sys(&[&[1, 1]], &[1]);
        s.reduce(0, true);
        assert_eq!(s.dense_matrix(), vec![vec![0, 1]]);
        assert_eq!(s.targets(), &[0]);

        let mut s = sys(&[&[1, 1]], &[1]);
        s.reduce(0, false);
        assert_eq!(s.dense_matrix(), vec![vec![0, 1]]);
        assert_eq!(s.targets(), &[1]);
    }

    #[test]
    fn reduce_on_empty_column_keeps_targets() {
        let mut s = sys(&[&[0, 1]], &[1]);
        s.reduce(0, true);
        assert_eq!(s.targets(), &[1]);
        assert_eq!(s.vars()[0].value, Some(true));
    }

    #[test]
    fn feasibility_rules() {
        assert!(feasible(&sys(&[&[1, 1]], &[1])));
        assert!(!feasible(&sys(&[&[1, 1]], &[3])));
        assert!(!feasible(&sys(&[&[0, 0]], &[1])));
    }

    #[test]
    fn probabilities_of_two_solutions() {
        let s = sys(&[&[1, 1]], &[1]);
        let set = enumerate_backtracking(&s, &TraversalLimits::unlimited());
        assert_eq!(probabilities(&set).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn probabilities_need_a_solution() {
        let s = sys(&[&[1, 1]], &[3]);
        let set = enumerate_backtracking(&s, &TraversalLimits::unlimited());
        assert_eq!(probabilities(&set), Err(CspError::EmptySolutionSet));
    }

    #[test]
    fn assignment_bits_past_one_word() {
        let mut a = Assignment::zeros(130);
        a.set(0, true);
        a.set(64, true);
        a.set(129, true);
        assert_eq!(a.count_ones(), 3);
        assert!(a.get(129) && !a.get(128));
        a.set(64, false);
        assert_eq!(a.count_ones(), 2);
    }
}
