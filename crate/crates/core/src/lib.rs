//! Minesweeper solving suite: game engine, constraint extraction and solution
//! enumeration, move heuristics, small neural networks, the versioned solver
//! policies and their training pipelines.

pub mod csp;
pub mod engine;
pub mod heuristics;
pub mod neural;
pub mod policies;
pub mod rng;
pub mod training;

pub use engine::{BoardConfig, CellView, Coord, GameError, GameState, GameStatus};
