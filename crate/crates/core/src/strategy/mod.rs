//! Winning strategies: tables extracted from search, sums of them along a
//! board, the quarter-turn mirror, and play by exact values.

mod build;
pub mod grid;
pub mod plan;
mod session;
mod verify;

use serde::Serialize;

use crate::board::{BoardError, BoardSpec, IllegalMove, Player};
use crate::outcome::OutcomeSet;
use crate::Exhausted;

pub use build::{
    build_base_strategy, compose_sum, mirror_strategy, strategy_for, PieceLimits, Recipes,
    SUPPORTED_WIDTHS,
};
pub use grid::{Grid, Region};
pub use plan::{search_play_move, value_play_move, Plan, Role};
pub use session::{PlaySession, SessionStatus, Transcript};
pub use verify::{verify_vs_exhaustive, VerifyLimits};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StrategyError {
    #[error("{player} does not win {spec} in the requested role (outcome {outcome})")]
    NotAWin {
        spec: BoardSpec,
        player: Player,
        outcome: OutcomeSet,
    },
    #[error("these parts do not combine into a certain win")]
    Uncertifiable,
    #[error("mirror play needs two equal squares")]
    ComponentMismatch,
    #[error("no move keeps the win")]
    NoWinningMove,
    #[error("position not covered by the strategy")]
    OffTable,
    #[error("no strategies for width {0}")]
    UnsupportedWidth(u16),
    #[error("{spec} is known as {known}, not {claimed}")]
    OutcomeMismatch {
        spec: BoardSpec,
        known: OutcomeSet,
        claimed: OutcomeSet,
    },
    #[error("it is {expected}'s turn")]
    OutOfTurn { expected: Player },
    #[error("the game is over")]
    GameOver,
    #[error("no recipe for {0} within the configured limits")]
    Unavailable(BoardSpec),
    #[error("board has {cells} cells, too many to check exhaustively")]
    TooLarge { cells: usize },
    #[error("limits exceeded: {0}")]
    Exhausted(#[from] Exhausted),
    #[error(transparent)]
    Board(#[from] BoardError),
    #[error("illegal move: {0}")]
    Illegal(#[from] IllegalMove),
}

/// How one player wins from one starting order.
#[derive(Clone, Debug)]
pub struct Side {
    pub player: Player,
    pub moves_first: bool,
    pub plan: Plan,
}

#[derive(Clone, Debug)]
pub struct Strategy {
    pub spec: BoardSpec,
    pub sides: Vec<Side>,
}

/// Serializable summary of a strategy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StrategySummary {
    pub spec: BoardSpec,
    pub sides: Vec<SideSummary>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SideSummary {
    pub player: Player,
    pub moves_first: bool,
    pub recipe: String,
}

impl Strategy {
    pub fn side(&self, player: Player, moves_first: bool) -> Option<&Side> {
        self.sides
            .iter()
            .find(|s| s.player == player && s.moves_first == moves_first)
    }

    pub fn role(&self, player: Player) -> Option<Role> {
        Role::from_flags(
            self.side(player, true).is_some(),
            self.side(player, false).is_some(),
        )
    }

    pub fn summary(&self) -> StrategySummary {
        StrategySummary {
            spec: self.spec,
            sides: self
                .sides
                .iter()
                .map(|s| SideSummary {
                    player: s.player,
                    moves_first: s.moves_first,
                    recipe: s.plan.describe(),
                })
                .collect(),
        }
    }

    /// One line per side, e.g. `H first: sum[...]`.
    pub fn recipe(&self) -> String {
        self.sides
            .iter()
            .map(|s| {
                format!(
                    "{} {}: {}",
                    s.player,
                    if s.moves_first { "first" } else { "second" },
                    s.plan.describe()
                )
            })
            .collect::<Vec<_>>()
            .join("; ")
    }
}
