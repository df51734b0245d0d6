use std::fmt;

use serde::{Deserialize, Serialize};

use super::grid::Grid;
use super::{Side, Strategy, StrategyError};
use crate::board::{BoardSpec, Move, Player};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "state", content = "winner")]
pub enum SessionStatus {
    InProgress,
    Finished(Player),
}

/// One game between the engine and someone else.
#[derive(Clone, Debug)]
pub struct PlaySession {
    grid: Grid,
    strategy: Strategy,
    side: Side,
    first: Player,
    to_move: Player,
    history: Vec<Move>,
    last_opponent: Option<Move>,
}

impl PlaySession {
    /// The engine plays `engine`; `first` moves first.
    pub fn new(strategy: Strategy, engine: Player, first: Player) -> Result<Self, StrategyError> {
        let side = strategy
            .side(engine, engine == first)
            .cloned()
            .ok_or(StrategyError::NotAWin {
                spec: strategy.spec,
                player: engine,
                outcome: crate::outcome::OutcomeSet::ALL,
            })?;
        Ok(PlaySession {
            grid: Grid::new(strategy.spec)?,
            strategy,
            side,
            first,
            to_move: first,
            history: Vec::new(),
            last_opponent: None,
        })
    }

    /// The side of `strategy` that wins when `first` moves first, if any.
    pub fn auto_engine(strategy: &Strategy, first: Player) -> Option<Player> {
        strategy
            .sides
            .iter()
            .find(|s| s.moves_first == (s.player == first))
            .map(|s| s.player)
    }

    /// Rebuilds a session by replaying its moves.
    pub fn replay(
        strategy: Strategy,
        engine: Player,
        first: Player,
        moves: &[Move],
    ) -> Result<Self, StrategyError> {
        let mut s = PlaySession::new(strategy, engine, first)?;
        for mv in moves {
            s.apply(*mv)?;
        }
        Ok(s)
    }

    pub fn spec(&self) -> BoardSpec {
        self.strategy.spec
    }

    pub fn engine(&self) -> Player {
        self.side.player
    }

    pub fn first(&self) -> Player {
        self.first
    }

    pub fn to_move(&self) -> Player {
        self.to_move
    }

    pub fn moves(&self) -> &[Move] {
        &self.history
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn recipe(&self) -> String {
        self.side.plan.describe()
    }

    pub fn status(&self) -> SessionStatus {
        if self.grid.has_move(self.to_move) {
            SessionStatus::InProgress
        } else {
            SessionStatus::Finished(self.to_move.opponent())
        }
    }

    fn apply(&mut self, mv: Move) -> Result<(), StrategyError> {
        if self.status() != SessionStatus::InProgress {
            return Err(StrategyError::GameOver);
        }
        if mv.player != self.to_move {
            return Err(StrategyError::OutOfTurn {
                expected: self.to_move,
            });
        }
        self.grid.apply(&mv)?;
        if mv.player != self.side.player {
            self.last_opponent = Some(mv);
        }
        self.history.push(mv);
        self.to_move = self.to_move.opponent();
        Ok(())
    }

    /// A move by the engine's opponent.
    pub fn play(&mut self, mv: Move) -> Result<(), StrategyError> {
        if mv.player == self.side.player {
            return Err(StrategyError::OutOfTurn {
                expected: self.side.player.opponent(),
            });
        }
        self.apply(mv)
    }

    pub fn engine_move(&mut self) -> Result<Move, StrategyError> {
        if self.status() != SessionStatus::InProgress {
            return Err(StrategyError::GameOver);
        }
        if self.to_move != self.side.player {
            return Err(StrategyError::OutOfTurn {
                expected: self.to_move,
            });
        }
        let mv = self
            .side
            .plan
            .next_move(&self.grid, self.side.player, self.last_opponent.as_ref())?;
        self.grid.check(&mv)?;
        self.apply(mv)?;
        Ok(mv)
    }

    pub fn transcript(&self) -> Transcript {
        Transcript {
            spec: self.spec(),
            recipe: format!("{} {}", self.side.player, self.recipe()),
            moves: self.history.clone(),
        }
    }
}

/// A finished or running game: a header naming board and recipe, then
/// one move per line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub spec: BoardSpec,
    pub recipe: String,
    pub moves: Vec<Move>,
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# board {}", self.spec)?;
        writeln!(f, "# engine {}", self.recipe)?;
        for mv in &self.moves {
            writeln!(f, "{mv}")?;
        }
        Ok(())
    }
}
