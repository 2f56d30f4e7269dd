//! Benchmark harness: seeded game sweeps over solver versions and board
//! configurations, CSV output and grouped summaries.

pub mod aggregate;
pub mod harness;
pub mod pipeline;
pub mod spec;

pub use aggregate::{aggregate, slope_interval, write_summary, GroupBy, GroupSummary, SlopeInterval};
pub use harness::{
    board_seed, policy_seed, run_bench, run_cell, write_csv, write_report, BenchReport, BenchRow, CellResult, GameRecord, CSV_HEADER,
};
pub use spec::{BenchSpec, BoardCell, SpecError};
