use std::collections::HashSet;

use super::grid::Grid;
use super::{Side, Strategy, StrategyError};
use crate::board::{BoardSpec, Move};
use crate::Exhausted;

#[derive(Clone, Copy, Debug)]
pub struct VerifyLimits {
    pub max_cells: usize,
    /// Strategy moves examined per side.
    pub max_nodes: u64,
}

impl Default for VerifyLimits {
    fn default() -> Self {
        VerifyLimits {
            max_cells: 128,
            max_nodes: 50_000_000,
        }
    }
}

struct Walk<'a> {
    side: &'a Side,
    nodes: u64,
    limits: VerifyLimits,
    /// Opponent-to-move positions already shown to be won.
    won: HashSet<Grid>,
}

impl Walk<'_> {
    /// The strategy's player is to move, the opponent having just played `last`.
    fn ours(&mut self, grid: &Grid, last: Option<&Move>) -> Result<bool, StrategyError> {
        self.nodes += 1;
        if self.nodes > self.limits.max_nodes {
            return Err(Exhausted::Nodes.into());
        }
        let player = self.side.player;
        if !grid.has_move(player) {
            return Ok(false);
        }
        let mv = match self.side.plan.next_move(grid, player, last) {
            Ok(mv) => mv,
            Err(StrategyError::Exhausted(e)) => return Err(e.into()),
            Err(_) => return Ok(false),
        };
        if mv.player != player || grid.check(&mv).is_err() {
            return Ok(false);
        }
        let mut next = grid.clone();
        next.apply(&mv)?;
        self.theirs(next)
    }

    fn theirs(&mut self, grid: Grid) -> Result<bool, StrategyError> {
        if self.won.contains(&grid) {
            return Ok(true);
        }
        let opp = self.side.player.opponent();
        for reply in grid.legal_moves(opp) {
            let mut next = grid.clone();
            next.apply(&reply)?;
            if !self.ours(&next, Some(&reply))? {
                return Ok(false);
            }
        }
        self.won.insert(grid);
        Ok(true)
    }
}

/// Plays every side of `strategy` against all opponent lines on `spec`.
/// True when the strategy's player makes the last move in every line.
pub fn verify_vs_exhaustive(
    strategy: &Strategy,
    spec: BoardSpec,
    limits: VerifyLimits,
) -> Result<bool, StrategyError> {
    if spec.cells() > limits.max_cells {
        return Err(StrategyError::TooLarge { cells: spec.cells() });
    }
    if spec != strategy.spec || strategy.sides.is_empty() {
        return Ok(false);
    }
    for side in &strategy.sides {
        let mut walk = Walk {
            side,
            nodes: 0,
            limits,
            won: HashSet::new(),
        };
        let empty = Grid::new(spec)?;
        let ok = if side.moves_first {
            walk.ours(&empty, None)?
        } else {
            walk.theirs(empty)?
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}
