//! Benchmark specifications and their key-value file format.
//!
//! ```text
//! # comments start with '#'
//! versions    = 3.0, 4.0, 4.5
//! sizes       = 5..15          # larger board dimension p (ranges inclusive)
//! dim_ratios  = 0.5, 0.75, 1.0 # q = round(ratio · p)
//! mine_ratios = 0.05, 0.10     # n = round(ratio · p · q), kept in 1..p·q-1
//! boards      = 9x9:10         # explicit p x q : n cells, added after the sweep
//! games       = 100
//! timeout_ms  = 5000
//! seed        = 1
//! timing      = true           # false writes zero timing columns
//! ```
//!
//! Every key is optional; missing keys take the values of
//! [`BenchSpec::default`].

use std::path::PathBuf;
use std::time::Duration;

use minesweep_core::policies::VersionId;
use minesweep_core::training::board_dims;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid spec: {0}")]
    Invalid(String),
    #[error("unknown preset {0:?} (expected beginner or paper53)")]
    UnknownPreset(String),
}

/// One board configuration of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoardCell {
    pub p: usize,
    pub q: usize,
    pub n: usize,
}

impl BoardCell {
    pub fn from_ratios(p: usize, dim_ratio: f64, mine_ratio: f64) -> Self {
        let (p, q, n) = board_dims(p, dim_ratio, mine_ratio);
        Self { p, q, n }
    }

    pub fn mine_ratio(&self) -> f64 {
        self.n as f64 / (self.p * self.q) as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchSpec {
    pub versions: Vec<VersionId>,
    pub board_sizes: Vec<usize>,
    pub dim_ratios: Vec<f64>,
    pub mine_ratios: Vec<f64>,
    pub boards: Vec<BoardCell>,
    pub games_per_cell: usize,
    pub timeout: Duration,
    pub seed_base: u64,
    pub output: Option<PathBuf>,
    /// Record wall-clock columns; off gives byte-stable output.
    pub timing: bool,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self::paper53()
    }
}

impl BenchSpec {
    /// Sizes 5 to 15, dimension ratios 0.5/0.75/1, mine ratios 5% to 25%,
    /// 100 games per cell, 5 s per game.
    pub fn paper53() -> Self {
        Self {
            versions: VersionId::BENCHMARKED.to_vec(),
            board_sizes: (5..=15).collect(),
            dim_ratios: vec![0.5, 0.75, 1.0],
            mine_ratios: vec![0.05, 0.10, 0.15, 0.20, 0.25],
            boards: Vec::new(),
            games_per_cell: 100,
            timeout: Duration::from_secs(5),
            seed_base: 1,
            output: None,
            timing: true,
            workers: 0,
        }
    }

    /// The 9×9 board with 10 mines only.
    pub fn beginner() -> Self {
        Self {
            board_sizes: Vec::new(),
            dim_ratios: Vec::new(),
            mine_ratios: Vec::new(),
            boards: vec![BoardCell { p: 9, q: 9, n: 10 }],
            ..Self::paper53()
        }
    }

    pub fn preset(name: &str) -> Result<Self, SpecError> {
        match name {
            "beginner" => Ok(Self::beginner()),
            "paper53" => Ok(Self::paper53()),
            other => Err(SpecError::UnknownPreset(other.to_string())),
        }
    }

    /// Sweep cells in (size, dimension ratio, mine ratio) order followed by
    /// the explicit boards, without duplicates.
    pub fn cells(&self) -> Vec<BoardCell> {
        let mut out: Vec<BoardCell> = Vec::new();
        for &p in &self.board_sizes {
            for &d in &self.dim_ratios {
                for &m in &self.mine_ratios {
                    let c = BoardCell::from_ratios(p, d, m);
                    if !out.contains(&c) {
                        out.push(c);
                    }
                }
            }
        }
        for &c in &self.boards {
            if !out.contains(&c) {
                out.push(c);
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if self.versions.is_empty() {
            return Err(SpecError::Invalid("no versions".into()));
        }
        if self.games_per_cell == 0 {
            return Err(SpecError::Invalid("games must be at least 1".into()));
        }
        if self.timeout.is_zero() {
            return Err(SpecError::Invalid("timeout must be positive".into()));
        }
        if self.cells().is_empty() {
            return Err(SpecError::Invalid("no board cells".into()));
        }
        for c in self.cells() {
            if c.p == 0 || c.q == 0 || c.n == 0 || c.n >= c.p * c.q {
                return Err(SpecError::Invalid(format!("board {}x{}:{} is not playable", c.p, c.q, c.n)));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let mut spec = Self::default();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |message: String| SpecError::Parse { line, message };
            let (key, value) = body.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "versions" => {
                    spec.versions = list(value)
                        .map(|v| v.parse::<VersionId>().map_err(|e| err(e.to_string())))
                        .collect::<Result<_, _>>()?
                }
                "sizes" => spec.board_sizes = parse_sizes(value).map_err(err)?,
                "dim_ratios" => spec.dim_ratios = parse_floats(value).map_err(err)?,
                "mine_ratios" => spec.mine_ratios = parse_floats(value).map_err(err)?,
                "boards" => {
                    spec.boards = list(value).map(|b| parse_board(b).map_err(err)).collect::<Result<_, _>>()?
                }
                "games" => spec.games_per_cell = parse_num(value).map_err(err)?,
                "timeout_ms" => spec.timeout = Duration::from_millis(parse_num(value).map_err(err)?),
                "seed" => spec.seed_base = parse_num(value).map_err(err)?,
                "workers" => spec.workers = parse_num(value).map_err(err)?,
                "timing" => {
                    spec.timing = value.parse::<bool>().map_err(|_| err(format!("expected true/false, got {value:?}")))?
                }
                "output" => spec.output = Some(PathBuf::from(value)),
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.parse::<T>().map_err(|_| format!("bad number {s:?}"))
}

fn parse_floats(value: &str) -> Result<Vec<f64>, String> {
    list(value).map(parse_num).collect()
}

fn parse_sizes(value: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for item in list(value) {
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (parse_num(a.trim())?, parse_num(b.trim())?);
                if a > b {
                    return Err(format!("empty range {item:?}"));
                }
                out.extend(a..=b);
            }
            None => out.push(parse_num(item)?),
        }
    }
    Ok(out)
}

fn parse_board(item: &str) -> Result<BoardCell, String> {
    let bad = || format!("board {item:?} is not of the form PxQ:N");
    let (dims, n) = item.split_once(':').ok_or_else(bad)?;
    let (p, q) = dims.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok(BoardCell { p: parse_num(p.trim())?, q: parse_num(q.trim())?, n: parse_num(n.trim())? })
}
