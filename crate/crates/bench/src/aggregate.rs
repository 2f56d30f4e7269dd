//! Pooling rows into groups and fitting win-ratio trends.

use std::collections::BTreeMap;

use minesweep_core::policies::VersionId;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::harness::BenchRow;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupBy {
    Version,
    /// Version and larger dimension p.
    Size,
    /// Version and mine count as a percentage of the board, rounded.
    MinePercent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupSummary {
    pub version: VersionId,
    /// p or the mine percentage, depending on the grouping; 0 for `Version`.
    pub key: usize,
    pub games: usize,
    pub wins: usize,
    pub timeouts: usize,
}

impl GroupSummary {
    pub fn win_ratio(&self) -> f64 {
        if self.games == 0 {
            0.0
        } else {
            self.wins as f64 / self.games as f64
        }
    }
}

/// Sums games, wins and timeouts per group, ordered by version then key.
pub fn aggregate(rows: &[BenchRow], by: GroupBy) -> Vec<GroupSummary> {
    let mut groups: BTreeMap<(VersionId, usize), GroupSummary> = BTreeMap::new();
    for r in rows {
        let key = match by {
            GroupBy::Version => 0,
            GroupBy::Size => r.cell.p,
            GroupBy::MinePercent => (r.cell.mine_ratio() * 100.0).round() as usize,
        };
        let g = groups
            .entry((r.version, key))
            .or_insert(GroupSummary { version: r.version, key, games: 0, wins: 0, timeouts: 0 });
        g.games += r.games;
        g.wins += r.wins;
        g.timeouts += r.timeouts;
    }
    groups.into_values().collect()
}

impl GroupBy {
    pub fn key_name(self) -> &'static str {
        match self {
            Self::Version => "all",
            Self::Size => "p",
            Self::MinePercent => "mine_percent",
        }
    }
}

/// Grouped summary as CSV: `version,<key>,games,wins,timeouts,win_ratio`.
pub fn write_summary<W: std::io::Write>(out: W, groups: &[GroupSummary], by: GroupBy) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["version", by.key_name(), "games", "wins", "timeouts", "win_ratio"])?;
    for g in groups {
        w.write_record([
            g.version.as_str().to_string(),
            g.key.to_string(),
            g.games.to_string(),
            g.wins.to_string(),
            g.timeouts.to_string(),
            format!("{:.4}", g.win_ratio()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Least-squares slope with a two-sided confidence interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeInterval {
    pub slope: f64,
    pub intercept: f64,
    pub low: f64,
    pub high: f64,
}

/// Fits `y = a + b·x` and returns `b` with its `level` interval from the
/// t distribution with n−2 degrees of freedom. Needs three points and two
/// distinct x values.
pub fn slope_interval(xs: &[f64], ys: &[f64], level: f64) -> Option<SlopeInterval> {
    let n = xs.len();
    if n != ys.len() || n < 3 || !(0.0..1.0).contains(&level) {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let se = (sse / (nf - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0).ok()?.inverse_cdf(0.5 + level / 2.0);
    Some(SlopeInterval { slope, intercept, low: slope - t * se, high: slope + t * se })
}
