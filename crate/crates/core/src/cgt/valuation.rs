//! Game values of Domineering positions.

use std::collections::HashMap;
use std::sync::LazyLock;
use std::time::{Duration, Instant};

use parking_lot::RwLock;

use super::game::{canonicalize, GameValue};
use crate::board::{ComponentKey, Player, Position};
use crate::Exhausted;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValueLimits {
    /// New component positions evaluated in one call.
    pub max_positions: u64,
    /// Largest canonical form, counted as left plus right options.
    pub max_options: usize,
    pub max_time: Duration,
}

impl Default for ValueLimits {
    fn default() -> Self {
        ValueLimits {
            max_positions: 20_000_000,
            max_options: 4096,
            max_time: Duration::from_secs(600),
        }
    }
}

/// Component values are shared by every caller in the process.
static MEMO: LazyLock<RwLock<HashMap<ComponentKey, GameValue>>> =
    LazyLock::new(Default::default);

struct Valuer {
    limits: ValueLimits,
    started: Instant,
    evaluated: u64,
}

impl Valuer {
    fn position(&mut self, pos: &Position) -> Result<GameValue, Exhausted> {
        let mut total = GameValue::zero();
        for key in pos.canonical_key().parts {
            total = total.add(self.component(key)?);
        }
        Ok(total)
    }

    fn component(&mut self, key: ComponentKey) -> Result<GameValue, Exhausted> {
        if let Some(&g) = MEMO.read().get(&key) {
            return Ok(g);
        }
        self.evaluated += 1;
        if self.evaluated > self.limits.max_positions {
            return Err(Exhausted::Positions);
        }
        if self.evaluated % 1024 == 0 && self.started.elapsed() > self.limits.max_time {
            return Err(Exhausted::Time);
        }
        let pos = key.position();
        let mut left = Vec::new();
        for m in pos.move_masks(Player::Vertical) {
            left.push(self.position(&pos.with_bits(m))?);
        }
        let mut right = Vec::new();
        for m in pos.move_masks(Player::Horizontal) {
            right.push(self.position(&pos.with_bits(m))?);
        }
        let g = canonicalize(left, right);
        if g.left_options().len() + g.right_options().len() > self.limits.max_options {
            return Err(Exhausted::Options);
        }
        MEMO.write().insert(key, g);
        Ok(g)
    }
}

/// Canonical value of `pos`: Vertical is Left. Components are valued
/// separately and added.
pub fn value(pos: &Position, limits: ValueLimits) -> Result<GameValue, Exhausted> {
    Valuer {
        limits,
        started: Instant::now(),
        evaluated: 0,
    }
    .position(pos)
}
