use std::sync::Arc;

use crate::engine::{CellView, Coord, GameState};

use super::CspError;

/// One column of the system: the board cell it stands for and its current
/// value (`None` while unassigned, `Some(true)` for a mine).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Variable {
    pub coord: Coord,
    pub value: Option<bool>,
}

#[derive(Debug, PartialEq, Eq)]
struct Incidence {
    // Variables with a 1 in each row, ascending.
    rows: Vec<Vec<usize>>,
    // Rows with a 1 in each column, ascending.
    cols: Vec<Vec<usize>>,
}

/// The linear system `A·x = N` over 0/1 variables.
///
/// `A` is stored as a fixed incidence structure (shared between clones) plus
/// the assignment state: a coefficient `A[i][j]` is live while variable `j` is
/// unassigned, so zeroing column `j` is the same as assigning `j`. Targets are
/// kept already reduced by the mines assigned so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSystem {
    incidence: Arc<Incidence>,
    vars: Vec<Variable>,
    targets: Vec<i32>,
    // Unassigned variables per row.
    live: Vec<u32>,
}

impl ConstraintSystem {
    fn from_parts(coords: Vec<Coord>, rows: Vec<Vec<usize>>, targets: Vec<i32>) -> Self {
        let mut cols = vec![Vec::new(); coords.len()];
        for (i, row) in rows.iter().enumerate() {
            for &j in row {
                cols[j].push(i);
            }
        }
        let live = rows.iter().map(|r| r.len() as u32).collect();
        Self {
            incidence: Arc::new(Incidence { rows, cols }),
            vars: coords.into_iter().map(|coord| Variable { coord, value: None }).collect(),
            targets,
            live,
        }
    }

    /// Builds a system from a dense 0/1 matrix. Variable `j` gets the
    /// placeholder coordinate `(0, j)`.
    pub fn from_dense(matrix: &[Vec<u8>], targets: &[i32]) -> Result<Self, CspError> {
        if matrix.len() != targets.len() {
            return Err(CspError::Shape(format!(
                "{} matrix rows but {} targets",
                matrix.len(),
                targets.len()
            )));
        }
        let width = matrix.first().map_or(0, Vec::len);
        let mut rows = Vec::with_capacity(matrix.len());
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != width {
                return Err(CspError::Shape(format!("row {i} has {} entries, expected {width}", row.len())));
            }
            let mut vars = Vec::new();
            for (j, &a) in row.iter().enumerate() {
                match a {
                    0 => {}
                    1 => vars.push(j),
                    other => return Err(CspError::Shape(format!("entry ({i}, {j}) is {other}, not 0/1"))),
                }
            }
            rows.push(vars);
        }
        if let Some(i) = targets.iter().position(|&t| t < 0) {
            return Err(CspError::Shape(format!("target {i} is negative")));
        }
        let coords = (0..width).map(|j| Coord::new(0, j)).collect();
        Ok(Self::from_parts(coords, rows, targets.to_vec()))
    }

    /// `count` variables and no rows.
    pub fn unconstrained(count: usize) -> Self {
        let coords = (0..count).map(|j| Coord::new(0, j)).collect();
        Self::from_parts(coords, Vec::new(), Vec::new())
    }

    /// One row per uncovered cell that still touches a covered, unflagged
    /// cell; one variable per such covered cell. Flagged neighbours are taken
    /// off the target. Rows and variables follow row-major board order.
    pub fn extract(state: &GameState) -> Result<Self, CspError> {
        let mut var_of = vec![usize::MAX; state.rows() * state.cols()];
        let mut coords = Vec::new();
        let mut rows = Vec::new();
        let mut targets = Vec::new();

        for c in state.coords() {
            let CellView::Uncovered(count) = state.cell(c) else { continue };
            let mut flagged = 0i32;
            let mut covered = Vec::new();
            for n in state.neighbors(c) {
                match state.cell(n) {
                    CellView::Flagged => flagged += 1,
                    CellView::Covered => covered.push(n),
                    CellView::Uncovered(_) => {}
                }
            }
            let target = count as i32 - flagged;
            if target < 0 || target as usize > covered.len() {
                return Err(CspError::Contradiction { cell: Some(c) });
            }
            if covered.is_empty() {
                continue;
            }
            let mut row = Vec::with_capacity(covered.len());
            for n in covered {
                let idx = state.index(n);
                if var_of[idx] == usize::MAX {
                    var_of[idx] = usize::MAX - 1;
                }
                row.push(n);
            }
            rows.push(row);
            targets.push(target);
        }

        // Number variables in board order, then rewrite rows as indices.
        for idx in 0..var_of.len() {
            if var_of[idx] == usize::MAX - 1 {
                var_of[idx] = coords.len();
                coords.push(state.coord(idx));
            }
        }
        let rows = rows
            .into_iter()
            .map(|row| {
                let mut r: Vec<usize> = row.into_iter().map(|n| var_of[state.index(n)]).collect();
                r.sort_unstable();
                r
            })
            .collect();
        Ok(Self::from_parts(coords, rows, targets))
    }

    pub fn num_rows(&self) -> usize {
        self.targets.len()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn coords(&self) -> Vec<Coord> {
        self.vars.iter().map(|v| v.coord).collect()
    }

    pub fn var_index(&self, coord: Coord) -> Option<usize> {
        self.vars.iter().position(|v| v.coord == coord)
    }

    /// Current (reduced) target of row `i`.
    pub fn target(&self, i: usize) -> i32 {
        self.targets[i]
    }

    pub fn targets(&self) -> &[i32] {
        &self.targets
    }

    /// Live coefficient `A[i][j]`.
    pub fn coefficient(&self, i: usize, j: usize) -> u8 {
        u8::from(self.vars[j].value.is_none() && self.incidence.rows[i].binary_search(&j).is_ok())
    }

    pub fn dense_matrix(&self) -> Vec<Vec<u8>> {
        (0..self.num_rows())
            .map(|i| (0..self.num_vars()).map(|j| self.coefficient(i, j)).collect())
            .collect()
    }

    /// Unassigned variables in row `i`.
    pub fn row_vars(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.incidence.rows[i].iter().copied().filter(|&j| self.vars[j].value.is_none())
    }

    pub fn row_live(&self, i: usize) -> usize {
        self.live[i] as usize
    }

    /// Nonzero entries in column `j` of the live matrix.
    pub fn column_weight(&self, j: usize) -> usize {
        if self.vars[j].value.is_some() {
            0
        } else {
            self.incidence.cols[j].len()
        }
    }

    pub fn is_assigned(&self, j: usize) -> bool {
        self.vars[j].value.is_some()
    }

    pub fn all_assigned(&self) -> bool {
        self.vars.iter().all(|v| v.value.is_some())
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.live.iter().all(|&l| l == 0)
    }

    /// Assigns variable `j`: its column is zeroed and, for a mine, every row
    /// containing it loses one from its target.
    pub fn reduce(&mut self, j: usize, mine: bool) {
        assert!(self.vars[j].value.is_none(), "variable {j} is already assigned");
        self.vars[j].value = Some(mine);
        for &i in &self.incidence.cols[j] {
            self.live[i] -= 1;
            if mine {
                self.targets[i] -= 1;
            }
        }
    }

    /// Inverse of [`reduce`](Self::reduce).
    pub(crate) fn unassign(&mut self, j: usize) {
        let mine = self.vars[j].value.take().expect("variable is assigned");
        for &i in &self.incidence.cols[j] {
            self.live[i] += 1;
            if mine {
                self.targets[i] += 1;
            }
        }
    }

    /// Every row can still be met: `0 <= N_i <= unassigned variables in row`.
    pub fn feasible(&self) -> bool {
        (0..self.num_rows()).all(|i| self.row_ok(i))
    }

    pub(crate) fn row_ok(&self, i: usize) -> bool {
        self.targets[i] >= 0 && self.targets[i] as u32 <= self.live[i]
    }

    /// Feasibility of just the rows touching variable `j`.
    pub(crate) fn rows_of_ok(&self, j: usize) -> bool {
        self.incidence.cols[j].iter().all(|&i| self.row_ok(i))
    }

    /// Unassigned variable with the heaviest column; lowest index on ties.
    pub fn most_constrained(&self) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for j in 0..self.num_vars() {
            if self.vars[j].value.is_some() {
                continue;
            }
            let w = self.incidence.cols[j].len();
            if best.is_none_or(|(_, bw)| w > bw) {
                best = Some((j, w));
            }
        }
        best.map(|(j, _)| j)
    }

    pub fn first_unassigned(&self) -> Option<usize> {
        self.vars.iter().position(|v| v.value.is_none())
    }

    /// Does `values` (one entry per variable) satisfy the original system,
    /// ignoring the current assignment state?
    pub fn is_satisfied_by(&self, values: &super::Assignment) -> bool {
        self.incidence.rows.iter().enumerate().all(|(i, row)| {
            let original = self.targets[i]
                + row.iter().filter(|&&j| self.vars[j].value == Some(true)).count() as i32;
            row.iter().filter(|&&j| values.get(j)).count() as i32 == original
        })
    }
}
