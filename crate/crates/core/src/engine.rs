//! Minesweeper rules: board setup, uncover with zero flood fill, flags and
//! win/loss bookkeeping.
//!
//! Mines are placed lazily on the first uncover so that the first opened cell
//! is never mined. Placement shuffles every other cell with the board seed and
//! mines the first `n` of them (see [`crate::rng::shuffle`]).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{rng_from_seed, shuffle};

/// Board coordinate: `row` in `0..p`, `col` in `0..q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    #[serde(rename = "i")]
    pub row: usize,
    #[serde(rename = "j")]
    pub col: usize,
}

impl Coord {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoardConfig {
    pub rows: usize,
    pub cols: usize,
    pub mines: usize,
    pub seed: u64,
}

impl BoardConfig {
    pub fn new(rows: usize, cols: usize, mines: usize, seed: u64) -> Result<Self, GameError> {
        let config = Self { rows, cols, mines, seed };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), GameError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(GameError::InvalidConfig(format!(
                "board must be at least 1x1, got {}x{}",
                self.rows, self.cols
            )));
        }
        let cells = self.rows * self.cols;
        if self.mines == 0 || self.mines >= cells {
            return Err(GameError::InvalidConfig(format!(
                "mine count must be in 1..={} for a {}x{} board, got {}",
                cells - 1,
                self.rows,
                self.cols,
                self.mines
            )));
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    pub fn safe_cells(&self) -> usize {
        self.cells() - self.mines
    }

    pub fn mine_ratio(&self) -> f64 {
        self.mines as f64 / self.cells() as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellView {
    Covered,
    Flagged,
    Uncovered(u8),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameStatus {
    InProgress,
    Won,
    Lost,
}

impl GameStatus {
    pub fn is_finished(self) -> bool {
        self != GameStatus::InProgress
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("invalid board configuration: {0}")]
    InvalidConfig(String),
    #[error("cell {0} is outside the board")]
    OutOfBounds(Coord),
    #[error("illegal move at {cell}: {reason}")]
    IllegalMove { cell: Coord, reason: &'static str },
    #[error("game is already finished")]
    Finished,
}

/// Result of a successful uncover.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Reveal {
    /// Safe cells newly uncovered by this action (0 when a mine was hit).
    pub opened: usize,
    pub hit_mine: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameState {
    config: BoardConfig,
    mines: Vec<bool>,
    view: Vec<CellView>,
    flags_used: usize,
    covered_left: usize,
    status: GameStatus,
    first_move_done: bool,
    flag_history: Vec<Coord>,
}

impl GameState {
    pub fn new(config: BoardConfig) -> Result<Self, GameError> {
        config.validate()?;
        let cells = config.cells();
        Ok(Self {
            config,
            mines: vec![false; cells],
            view: vec![CellView::Covered; cells],
            flags_used: 0,
            covered_left: cells,
            status: GameStatus::InProgress,
            first_move_done: false,
            flag_history: Vec::new(),
        })
    }

    /// A game whose layout is already fixed, as if the first move had placed
    /// `mines`. Used for replays and fixtures.
    pub fn with_layout(rows: usize, cols: usize, mines: &[Coord]) -> Result<Self, GameError> {
        let mut state = Self::new(BoardConfig::new(rows, cols, mines.len(), 0)?)?;
        for &m in mines {
            if !state.contains(m) {
                return Err(GameError::OutOfBounds(m));
            }
            let idx = state.index(m);
            if state.mines[idx] {
                return Err(GameError::InvalidConfig(format!("mine {m} listed twice")));
            }
            state.mines[idx] = true;
        }
        state.first_move_done = true;
        Ok(state)
    }

    pub fn config(&self) -> &BoardConfig {
        &self.config
    }

    pub fn rows(&self) -> usize {
        self.config.rows
    }

    pub fn cols(&self) -> usize {
        self.config.cols
    }

    pub fn status(&self) -> GameStatus {
        self.status
    }

    pub fn flags_used(&self) -> usize {
        self.flags_used
    }

    /// Cells that are not uncovered (flagged cells included).
    pub fn covered_left(&self) -> usize {
        self.covered_left
    }

    pub fn first_move_done(&self) -> bool {
        self.first_move_done
    }

    /// Flags in the order they were placed (most recent last).
    pub fn flag_history(&self) -> &[Coord] {
        &self.flag_history
    }

    pub fn index(&self, c: Coord) -> usize {
        c.row * self.config.cols + c.col
    }

    pub fn coord(&self, index: usize) -> Coord {
        Coord::new(index / self.config.cols, index % self.config.cols)
    }

    pub fn contains(&self, c: Coord) -> bool {
        c.row < self.config.rows && c.col < self.config.cols
    }

    pub fn cell(&self, c: Coord) -> CellView {
        self.view[self.index(c)]
    }

    pub fn view(&self) -> &[CellView] {
        &self.view
    }

    /// Hidden layout. Only meaningful once the first move has been made.
    pub fn is_mine(&self, c: Coord) -> bool {
        self.mines[self.index(c)]
    }

    pub fn mine_cells(&self) -> Vec<Coord> {
        (0..self.mines.len())
            .filter(|&i| self.mines[i])
            .map(|i| self.coord(i))
            .collect()
    }

    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        (0..self.config.cells()).map(move |i| self.coord(i))
    }

    pub fn neighbors(&self, c: Coord) -> impl Iterator<Item = Coord> {
        neighbors(c, self.config.rows, self.config.cols)
    }

    /// Copy with the hidden layout erased: everything a player can see and
    /// nothing more. Policies run on this when advising a human.
    pub fn masked(&self) -> GameState {
        let mut copy = self.clone();
        copy.mines.iter_mut().for_each(|m| *m = false);
        copy
    }

    pub fn uncover(&mut self, c: Coord) -> Result<Reveal, GameError> {
        if self.status.is_finished() {
            return Err(GameError::Finished);
        }
        if !self.contains(c) {
            return Err(GameError::OutOfBounds(c));
        }
        match self.cell(c) {
            CellView::Flagged => {
                return Err(GameError::IllegalMove { cell: c, reason: "cell is flagged" })
            }
            CellView::Uncovered(_) => {
                return Err(GameError::IllegalMove { cell: c, reason: "cell is already uncovered" })
            }
            CellView::Covered => {}
        }
        if !self.first_move_done {
            self.place_mines(c);
        }
        let idx = self.index(c);
        if self.mines[idx] {
            self.status = GameStatus::Lost;
            return Ok(Reveal { opened: 0, hit_mine: true });
        }
        let opened = self.flood_open(c);
        if self.covered_left == self.config.mines {
            self.status = GameStatus::Won;
        }
        Ok(Reveal { opened, hit_mine: false })
    }

    pub fn toggle_flag(&mut self, c: Coord) -> Result<(), GameError> {
        if self.status.is_finished() {
            return Err(GameError::Finished);
        }
        if !self.contains(c) {
            return Err(GameError::OutOfBounds(c));
        }
        let idx = self.index(c);
        match self.view[idx] {
            CellView::Covered => {
                self.view[idx] = CellView::Flagged;
                self.flags_used += 1;
                self.flag_history.push(c);
            }
            CellView::Flagged => {
                self.view[idx] = CellView::Covered;
                self.flags_used -= 1;
                if let Some(pos) = self.flag_history.iter().rposition(|&f| f == c) {
                    self.flag_history.remove(pos);
                }
            }
            CellView::Uncovered(_) => {
                return Err(GameError::IllegalMove { cell: c, reason: "cannot flag an uncovered cell" })
            }
        }
        Ok(())
    }

    fn place_mines(&mut self, safe: Coord) {
        let safe_idx = self.index(safe);
        let mut eligible: Vec<usize> = (0..self.config.cells()).filter(|&i| i != safe_idx).collect();
        let mut rng = rng_from_seed(self.config.seed);
        shuffle(&mut eligible, &mut rng);
        for &i in &eligible[..self.config.mines] {
            self.mines[i] = true;
        }
        self.first_move_done = true;
    }

    fn adjacent_mines(&self, c: Coord) -> u8 {
        self.neighbors(c).filter(|&n| self.is_mine(n)).count() as u8
    }

    // Opens `start` and, through zero cells, the connected zero region plus its
    // numbered fringe. Flagged cells stay closed.
    fn flood_open(&mut self, start: Coord) -> usize {
        let mut opened = 0;
        let mut stack = vec![start];
        while let Some(c) = stack.pop() {
            let idx = self.index(c);
            if self.view[idx] != CellView::Covered || self.mines[idx] {
                continue;
            }
            let count = self.adjacent_mines(c);
            self.view[idx] = CellView::Uncovered(count);
            self.covered_left -= 1;
            opened += 1;
            if count == 0 {
                stack.extend(self.neighbors(c));
            }
        }
        opened
    }
}

impl fmt::Display for GameState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows() {
            for c in 0..self.cols() {
                let ch = match self.cell(Coord::new(r, c)) {
                    CellView::Covered => '.',
                    CellView::Flagged => 'F',
                    CellView::Uncovered(n) => (b'0' + n) as char,
                };
                write!(f, "{ch}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// The up-to-8 in-bounds neighbours of `c`, row-major order.
pub fn neighbors(c: Coord, rows: usize, cols: usize) -> impl Iterator<Item = Coord> {
    let r0 = c.row.saturating_sub(1);
    let r1 = (c.row + 1).min(rows - 1);
    let c0 = c.col.saturating_sub(1);
    let c1 = (c.col + 1).min(cols - 1);
    (r0..=r1)
        .flat_map(move |r| (c0..=c1).map(move |cc| Coord::new(r, cc)))
        .filter(move |&n| n != c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn game(rows: usize, cols: usize, mines: usize, seed: u64) -> GameState {
        GameState::new(BoardConfig::new(rows, cols, mines, seed).unwrap()).unwrap()
    }

    #[test]
    fn fresh_beginner_board_is_all_covered() {
        let g = game(9, 9, 10, 1);
        assert_eq!(g.covered_left(), 81);
        assert!(g.view().iter().all(|&v| v == CellView::Covered));
        assert_eq!(g.status(), GameStatus::InProgress);
        assert!(!g.first_move_done());
    }

    #[test]
    fn minimal_board_is_valid() {
        let g = game(1, 2, 1, 7);
        assert_eq!(g.view().len(), 2);
    }

    #[test]
    fn too_many_mines_is_rejected() {
        assert!(matches!(BoardConfig::new(2, 2, 4, 0), Err(GameError::InvalidConfig(_))));
        assert!(matches!(BoardConfig::new(2, 2, 0, 0), Err(GameError::InvalidConfig(_))));
        assert!(matches!(BoardConfig::new(0, 2, 1, 0), Err(GameError::InvalidConfig(_))));
    }

    #[test]
    fn first_uncover_is_never_a_mine() {
        for seed in 0..200 {
            let mut g = game(4, 4, 15, seed);
            let target = Coord::new((seed % 4) as usize, (seed / 4 % 4) as usize);
            let reveal = g.uncover(target).unwrap();
            assert!(!reveal.hit_mine);
            assert!(!g.is_mine(target));
            assert_eq!(g.mine_cells().len(), 15);
            assert_eq!(g.status(), GameStatus::Won);
        }
    }

    #[test]
    fn one_by_two_board_is_won_by_first_click() {
        let mut g = game(1, 2, 1, 7);
        g.uncover(Coord::new(0, 0)).unwrap();
        assert_eq!(g.cell(Coord::new(0, 0)), CellView::Uncovered(1));
        assert!(g.is_mine(Coord::new(0, 1)));
        assert_eq!(g.status(), GameStatus::Won);
    }

    #[test]
    fn zero_uncover_floods_region_and_fringe() {
        let mut g = GameState::with_layout(4, 4, &[Coord::new(3, 3)]).unwrap();
        let reveal = g.uncover(Coord::new(0, 0)).unwrap();
        assert_eq!(reveal.opened, 15);
        assert_eq!(g.cell(Coord::new(2, 2)), CellView::Uncovered(1));
        assert_eq!(g.cell(Coord::new(1, 1)), CellView::Uncovered(0));
        assert_eq!(g.cell(Coord::new(3, 3)), CellView::Covered);
        assert_eq!(g.status(), GameStatus::Won);
    }

    #[test]
    fn flood_fill_skips_flags() {
        let mut g = GameState::with_layout(3, 5, &[Coord::new(0, 4)]).unwrap();
        g.toggle_flag(Coord::new(1, 0)).unwrap();
        g.uncover(Coord::new(2, 0)).unwrap();
        assert_eq!(g.cell(Coord::new(1, 0)), CellView::Flagged);
        assert_eq!(g.covered_left(), 2);
        assert_eq!(g.status(), GameStatus::InProgress);
        for c in g.coords().collect::<Vec<_>>() {
            if let CellView::Uncovered(n) = g.cell(c) {
                assert_eq!(n, g.adjacent_mines(c));
                assert!(!g.is_mine(c));
            }
        }
    }

    #[test]
    fn flag_round_trip_and_errors() {
        let mut g = game(9, 9, 10, 1);
        let c = Coord::new(0, 0);
        let before = g.clone();
        g.toggle_flag(c).unwrap();
        assert_eq!(g.flags_used(), 1);
        assert_eq!(g.flag_history(), &[c]);
        assert!(matches!(g.uncover(c), Err(GameError::IllegalMove { .. })));
        g.toggle_flag(c).unwrap();
        assert_eq!(g, before);

        g.uncover(Coord::new(4, 4)).unwrap();
        assert!(matches!(g.toggle_flag(Coord::new(4, 4)), Err(GameError::IllegalMove { .. })));
        if g.status() == GameStatus::InProgress {
            assert!(matches!(g.uncover(Coord::new(4, 4)), Err(GameError::IllegalMove { .. })));
        }
    }

    #[test]
    fn finished_games_reject_moves() {
        let mut g = game(1, 2, 1, 3);
        g.uncover(Coord::new(0, 1)).unwrap();
        assert_eq!(g.status(), GameStatus::Won);
        assert_eq!(g.uncover(Coord::new(0, 0)), Err(GameError::Finished));
        assert_eq!(g.toggle_flag(Coord::new(0, 0)), Err(GameError::Finished));
    }

    #[test]
    fn losing_is_absorbing() {
        let mut g = game(5, 5, 12, 4);
        g.uncover(Coord::new(2, 2)).unwrap();
        let mine = g.mine_cells()[0];
        let reveal = g.uncover(mine).unwrap();
        assert!(reveal.hit_mine);
        assert_eq!(g.status(), GameStatus::Lost);
        assert_eq!(g.uncover(Coord::new(0, 0)), Err(GameError::Finished));
    }

    #[test]
    fn masked_copy_hides_layout_only() {
        let mut g = game(9, 9, 10, 5);
        g.uncover(Coord::new(4, 4)).unwrap();
        let m = g.masked();
        assert_eq!(m.view(), g.view());
        assert!(m.mine_cells().is_empty());
    }

    #[test]
    fn neighbor_counts() {
        assert_eq!(neighbors(Coord::new(0, 0), 9, 9).count(), 3);
        assert_eq!(neighbors(Coord::new(0, 4), 9, 9).count(), 5);
        assert_eq!(neighbors(Coord::new(4, 4), 9, 9).count(), 8);
        assert_eq!(neighbors(Coord::new(0, 0), 1, 1).count(), 0);
    }
}
