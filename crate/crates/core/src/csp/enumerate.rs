use std::time::Instant;

use rand::Rng;

use super::{dss, Assignment, ConstraintSystem};

/// Caps on a solution-set traversal. Hitting any of them (or a deadline)
/// marks the result as truncated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraversalLimits {
    pub max_solutions: usize,
    /// Maximum branch edges from the root to a node.
    pub max_depth: usize,
    /// Maximum search-tree nodes visited.
    pub max_iterations: u64,
}

impl TraversalLimits {
    pub const SAFETY_ITERATIONS: u64 = 1_000_000;

    pub const fn unlimited() -> Self {
        Self { max_solutions: usize::MAX, max_depth: usize::MAX, max_iterations: u64::MAX }
    }

    /// Limited traversal for the randomized enumerator: 100 solutions, depth 300.
    pub const fn dsscsp_capped() -> Self {
        Self { max_solutions: 100, max_depth: 300, max_iterations: Self::SAFETY_ITERATIONS }
    }

    /// Limited traversal for plain backtracking: 100 solutions, depth 1000.
    pub const fn backtracking_capped() -> Self {
        Self { max_solutions: 100, max_depth: 1000, max_iterations: Self::SAFETY_ITERATIONS }
    }

    pub fn is_valid(&self) -> bool {
        self.max_solutions > 0 && self.max_depth > 0 && self.max_iterations > 0
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Every node visited, leaves included.
    pub nodes: u64,
    /// Nodes at which a variable was branched on.
    pub branch_nodes: u64,
}

/// The solution matrix: one packed row per satisfying assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionSet {
    num_vars: usize,
    words_per_row: usize,
    rows: Vec<u64>,
    count: usize,
    pub truncated: bool,
    pub stats: SearchStats,
}

impl SolutionSet {
    fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            words_per_row: num_vars.div_ceil(64),
            rows: Vec::new(),
            count: 0,
            truncated: false,
            stats: SearchStats::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn get(&self, solution: usize, var: usize) -> bool {
        let w = self.rows[solution * self.words_per_row + var / 64];
        w >> (var % 64) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = Assignment> + '_ {
        (0..self.count).map(move |s| {
            let mut a = Assignment::zeros(self.num_vars);
            for j in 0..self.num_vars {
                if self.get(s, j) {
                    a.set(j, true);
                }
            }
            a
        })
    }

    /// Number of solutions in which each variable is a mine.
    pub fn mine_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.num_vars];
        for row in self.rows.chunks_exact(self.words_per_row.max(1)).take(self.count) {
            for (w, &word) in row.iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    counts[w * 64 + bits.trailing_zeros() as usize] += 1;
                    bits &= bits - 1;
                }
            }
        }
        counts
    }

    fn push(&mut self, system: &ConstraintSystem) {
        let start = self.rows.len();
        self.rows.resize(start + self.words_per_row, 0);
        for (j, v) in system.vars().iter().enumerate() {
            if v.value == Some(true) {
                self.rows[start + j / 64] |= 1 << (j % 64);
            }
        }
        self.count += 1;
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Flow {
    Continue,
    Stop,
}

struct Search {
    limits: TraversalLimits,
    deadline: Option<Instant>,
    out: SolutionSet,
}

impl Search {
    fn new(system: &ConstraintSystem, limits: &TraversalLimits, deadline: Option<Instant>) -> Self {
        Self { limits: *limits, deadline, out: SolutionSet::new(system.num_vars()) }
    }

    // Counts the node and reports whether the search may go on.
    fn visit(&mut self) -> Flow {
        self.out.stats.nodes += 1;
        if self.out.stats.nodes > self.limits.max_iterations {
            self.out.truncated = true;
            return Flow::Stop;
        }
        if let Some(deadline) = self.deadline {
            if self.out.stats.nodes % 256 == 0 && Instant::now() >= deadline {
                self.out.truncated = true;
                return Flow::Stop;
            }
        }
        Flow::Continue
    }

    fn record(&mut self, system: &ConstraintSystem) -> Flow {
        self.out.push(system);
        if self.out.len() >= self.limits.max_solutions {
            self.out.truncated = true;
            Flow::Stop
        } else {
            Flow::Continue
        }
    }

    fn backtrack(&mut self, system: &mut ConstraintSystem, depth: usize) -> Flow {
        if self.visit() == Flow::Stop {
            return Flow::Stop;
        }
        let Some(var) = system.first_unassigned() else {
            return self.record(system);
        };
        if depth >= self.limits.max_depth {
            self.out.truncated = true;
            return Flow::Continue;
        }
        self.out.stats.branch_nodes += 1;
        for value in [false, true] {
            system.reduce(var, value);
            let flow = if system.rows_of_ok(var) {
                self.backtrack(system, depth + 1)
            } else {
                Flow::Continue
            };
            system.unassign(var);
            if flow == Flow::Stop {
                return Flow::Stop;
            }
        }
        Flow::Continue
    }

    fn dsscsp(&mut self, system: &ConstraintSystem, depth: usize, rng: &mut impl Rng) -> Flow {
        if self.visit() == Flow::Stop {
            return Flow::Stop;
        }
        let Some(var) = system.most_constrained() else {
            return self.record(system);
        };
        if depth >= self.limits.max_depth {
            self.out.truncated = true;
            return Flow::Continue;
        }
        self.out.stats.branch_nodes += 1;
        let order = if rng.random_bool(0.5) { [false, true] } else { [true, false] };
        for value in order {
            let mut child = system.clone();
            child.reduce(var, value);
            if !child.rows_of_ok(var) || dss(&mut child).is_err() {
                continue;
            }
            if self.dsscsp(&child, depth + 1, rng) == Flow::Stop {
                return Flow::Stop;
            }
        }
        Flow::Continue
    }
}

/// Plain backtracking over variables in index order, pruning any branch that
/// makes a touched row infeasible. Each surviving leaf is one solution.
pub fn enumerate_backtracking(system: &ConstraintSystem, limits: &TraversalLimits) -> SolutionSet {
    enumerate_backtracking_until(system, limits, None)
}

pub fn enumerate_backtracking_until(
    system: &ConstraintSystem,
    limits: &TraversalLimits,
    deadline: Option<Instant>,
) -> SolutionSet {
    let mut search = Search::new(system, limits, deadline);
    if system.feasible() {
        let mut work = system.clone();
        search.backtrack(&mut work, 0);
    }
    search.out
}

/// Backtracking with the row rules applied at every node.
///
/// The root is first closed under [`dss`]. At each node the unassigned
/// variable with the heaviest column is branched on, trying 0 and 1 in random
/// order; each child is reduced, checked for feasibility and closed under
/// `dss` before recursing. Every variable fixed that way is reduced into the
/// child, so a leaf is reached once no variable is left unassigned.
pub fn enumerate_dsscsp(
    system: &ConstraintSystem,
    limits: &TraversalLimits,
    rng: &mut impl Rng,
) -> SolutionSet {
    enumerate_dsscsp_until(system, limits, rng, None)
}

pub fn enumerate_dsscsp_until(
    system: &ConstraintSystem,
    limits: &TraversalLimits,
    rng: &mut impl Rng,
    deadline: Option<Instant>,
) -> SolutionSet {
    let mut search = Search::new(system, limits, deadline);
    let mut root = system.clone();
    if root.feasible() && dss(&mut root).is_ok() {
        search.dsscsp(&root, 0, rng);
    }
    search.out
}
