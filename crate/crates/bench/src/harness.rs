//! Running sweeps and writing their results.

use std::io::Write;
use std::path::Path;
use std::time::Duration;

use minesweep_core::policies::{play_game, Models, PolicyContext, VersionId};
use minesweep_core::rng::derive_seed;
use minesweep_core::BoardConfig;
use rayon::prelude::*;

use crate::spec::{BenchSpec, BoardCell};

pub const CSV_HEADER: [&str; 10] =
    ["version", "p", "q", "n", "games", "wins", "timeouts", "mean_moves", "mean_elapsed_ms", "win_ratio"];

/// Seed of game `game` on `cell`; the same for every version so that
/// versions are compared on identical boards.
pub fn board_seed(seed_base: u64, cell: BoardCell, game: usize) -> u64 {
    derive_seed(seed_base, &[cell.p as u64, cell.q as u64, cell.n as u64, game as u64])
}

pub fn policy_seed(board_seed: u64, version: VersionId) -> u64 {
    derive_seed(board_seed, &[version.code()])
}

/// Outcome of one game.
#[derive(Clone, Debug, PartialEq)]
pub struct GameRecord {
    pub won: bool,
    pub timed_out: bool,
    pub moves: usize,
    pub elapsed: Duration,
    pub move_times: Vec<Duration>,
}

/// Every game of one (version, board) cell, in game order.
#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub version: VersionId,
    pub cell: BoardCell,
    pub games: Vec<GameRecord>,
}

impl CellResult {
    pub fn wins(&self) -> usize {
        self.games.iter().filter(|g| g.won).count()
    }

    pub fn win_ratio(&self) -> f64 {
        if self.games.is_empty() {
            0.0
        } else {
            self.wins() as f64 / self.games.len() as f64
        }
    }

    /// Median wall time over every move of every game.
    pub fn median_move_time(&self) -> Duration {
        let mut all: Vec<Duration> = self.games.iter().flat_map(|g| g.move_times.iter().copied()).collect();
        if all.is_empty() {
            return Duration::ZERO;
        }
        all.sort_unstable();
        all[all.len() / 2]
    }

    pub fn row(&self) -> BenchRow {
        let games = self.games.len();
        let denom = games.max(1) as f64;
        BenchRow {
            version: self.version,
            cell: self.cell,
            games,
            wins: self.wins(),
            timeouts: self.games.iter().filter(|g| g.timed_out).count(),
            mean_moves: self.games.iter().map(|g| g.moves as f64).sum::<f64>() / denom,
            mean_elapsed_ms: self.games.iter().map(|g| g.elapsed.as_secs_f64() * 1e3).sum::<f64>() / denom,
            win_ratio: self.win_ratio(),
        }
    }
}

/// One CSV line.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub version: VersionId,
    pub cell: BoardCell,
    pub games: usize,
    pub wins: usize,
    pub timeouts: usize,
    pub mean_moves: f64,
    pub mean_elapsed_ms: f64,
    pub win_ratio: f64,
}

impl BenchRow {
    fn record(&self, timing: bool) -> [String; 10] {
        [
            self.version.as_str().to_string(),
            self.cell.p.to_string(),
            self.cell.q.to_string(),
            self.cell.n.to_string(),
            self.games.to_string(),
            self.wins.to_string(),
            self.timeouts.to_string(),
            format!("{:.3}", self.mean_moves),
            format!("{:.3}", if timing { self.mean_elapsed_ms } else { 0.0 }),
            format!("{:.4}", self.win_ratio),
        ]
    }
}

#[derive(Clone, Debug, Default)]
pub struct BenchReport {
    pub cells: Vec<CellResult>,
    /// Versions that could not be run, with the reason.
    pub skipped: Vec<(VersionId, String)>,
}

impl BenchReport {
    pub fn rows(&self) -> Vec<BenchRow> {
        self.cells.iter().map(CellResult::row).collect()
    }

    pub fn cell(&self, version: VersionId, cell: BoardCell) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.version == version && c.cell == cell)
    }
}

/// Plays `games` seeded games of `version` on `cell`.
pub fn run_cell(
    version: VersionId,
    models: &Models,
    cell: BoardCell,
    games: usize,
    seed_base: u64,
    timeout: Duration,
) -> Result<CellResult, String> {
    PolicyContext::new(version, models, 0).map_err(|e| e.to_string())?;
    let records = (0..games)
        .into_par_iter()
        .map(|g| {
            let seed = board_seed(seed_base, cell, g);
            let config = BoardConfig { rows: cell.p, cols: cell.q, mines: cell.n, seed };
            let mut ctx = PolicyContext::new(version, models, policy_seed(seed, version)).expect("checked above");
            let r = play_game(config, &mut ctx, Some(timeout));
            GameRecord { won: r.won, timed_out: r.timed_out, moves: r.moves, elapsed: r.elapsed, move_times: r.move_times }
        })
        .collect();
    Ok(CellResult { version, cell, games: records })
}

/// Runs every version on every cell of `spec`. Learned versions take their
/// networks from `model_dir`; versions whose models are missing are skipped
/// and listed in the report.
pub fn run_bench(spec: &BenchSpec, model_dir: Option<&Path>) -> BenchReport {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(spec.workers).build().expect("thread pool");
    pool.install(|| {
        let mut report = BenchReport::default();
        for &version in &spec.versions {
            let models = match (version.is_learned(), model_dir) {
                (false, _) => Models::default(),
                (true, None) => {
                    report.skipped.push((version, "no model directory given".into()));
                    continue;
                }
                (true, Some(dir)) => match Models::load_for(dir, version) {
                    Ok(m) => m,
                    Err(e) => {
                        report.skipped.push((version, e.to_string()));
                        continue;
                    }
                },
            };
            for cell in spec.cells() {
                match run_cell(version, &models, cell, spec.games_per_cell, spec.seed_base, spec.timeout) {
                    Ok(r) => report.cells.push(r),
                    Err(e) => {
                        report.skipped.push((version, e));
                        break;
                    }
                }
            }
        }
        report
    })
}

/// Writes the header and one line per row. With `timing` off the elapsed
/// column is zero, so reruns of a spec give identical bytes.
pub fn write_csv<W: Write>(out: W, rows: &[BenchRow], timing: bool) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.record(timing))?;
    }
    w.flush()?;
    Ok(())
}

/// Like [`write_csv`], followed by one error row per skipped version and
/// cell: the version and board, zero games, empty statistics.
pub fn write_report<W: Write>(out: W, report: &BenchReport, cells: &[BoardCell], timing: bool) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in report.rows() {
        w.write_record(r.record(timing))?;
    }
    for (version, _) in &report.skipped {
        for c in cells {
            let (p, q, n) = (c.p.to_string(), c.q.to_string(), c.n.to_string());
            w.write_record([version.as_str(), &p, &q, &n, "0", "0", "0", "", "", ""])?;
        }
    }
    w.flush()?;
    Ok(())
}
