//! Who wins Domineering: exhaustive outcome search, canonical game values,
//! sound rule propagation over a knowledge base of results, and composed
//! winning strategies.

pub mod board;
pub mod cgt;
pub mod knowledge;
pub mod outcome;
pub mod search;
pub mod strategy;

pub use board::{BoardError, BoardSpec, Cell, Move, Player, Position, Topology};
pub use cgt::{GameValue, ValueLimits};
pub use outcome::{OutcomeClass, OutcomeSet};
pub use search::{SearchLimits, SearchResult, Solver};

/// A computation stopped at one of its limits. The answer is unknown; no
/// partial result is ever offered in its place.
#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Exhausted {
    #[error("node limit reached")]
    Nodes,
    #[error("time limit reached")]
    Time,
    #[error("position limit reached")]
    Positions,
    #[error("option limit reached")]
    Options,
}
