//! Exhaustive outcome search.
//!
//! `wins_moving` is a boolean negamax: the mover wins iff some move leaves
//! a position the opponent loses when moving first. Results are cached in
//! a lossy transposition table keyed by the symmetry-reduced position.

use std::time::{Duration, Instant};

use smallvec::SmallVec;

use crate::board::{BoardError, BoardSpec, Player, Position};
use crate::cgt::{value, GameValue, ValueLimits};
use crate::knowledge::{Fact, Provenance};
use crate::outcome::{OutcomeClass, OutcomeSet};
use crate::Exhausted;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_nodes: u64,
    pub max_time: Duration,
    /// Transposition-table entries, rounded up to a power of two.
    pub table_capacity: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_nodes: 2_000_000_000,
            max_time: Duration::from_secs(600),
            table_capacity: 1 << 20,
        }
    }
}

impl SearchLimits {
    pub fn nodes(max_nodes: u64) -> Self {
        SearchLimits {
            max_nodes,
            ..SearchLimits::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchResult {
    /// `None` exactly when a limit was hit.
    pub outcome: Option<OutcomeClass>,
    pub nodes_visited: u64,
    pub table_hits: u64,
    pub elapsed: Duration,
    pub limits_hit: Option<Exhausted>,
}

#[derive(Clone, Copy, Default)]
struct Entry {
    fingerprint: u128,
    /// Subtree size when stored; decides replacement in the deep slot.
    nodes: u32,
    win: bool,
    used: bool,
}

/// Two entries per bucket: one kept while it covers the larger subtree,
/// one always replaced.
struct Table {
    buckets: Vec<[Entry; 2]>,
    mask: usize,
}

impl Table {
    fn new(capacity: usize) -> Table {
        let buckets = (capacity / 2).max(1).next_power_of_two();
        Table {
            buckets: vec![[Entry::default(); 2]; buckets],
            mask: buckets - 1,
        }
    }

    fn get(&self, fp: u128) -> Option<bool> {
        let b = &self.buckets[fp as usize & self.mask];
        b.iter()
            .find(|e| e.used && e.fingerprint == fp)
            .map(|e| e.win)
    }

    fn put(&mut self, fp: u128, win: bool, nodes: u64) {
        let nodes = nodes.min(u32::MAX as u64) as u32;
        let entry = Entry {
            fingerprint: fp,
            nodes,
            win,
            used: true,
        };
        let b = &mut self.buckets[fp as usize & self.mask];
        if !b[0].used || b[0].fingerprint == fp || nodes >= b[0].nodes {
            b[0] = entry;
        } else {
            b[1] = entry;
        }
    }
}

fn keyed(fp: u128, mover: Player) -> u128 {
    match mover {
        Player::Vertical => fp,
        Player::Horizontal => fp ^ 0x5bd1_e995_9e37_79b9_7f4a_7c15_f39c_c060,
    }
}

/// Memoizing solver. Reusing one solver across queries shares its table.
pub struct Solver {
    limits: SearchLimits,
    table: Table,
    nodes: u64,
    hits: u64,
    started: Instant,
    sum_threshold: Option<u32>,
}

/// Default component size for the value-sum path.
pub const DEFAULT_SUM_THRESHOLD: u32 = 16;

impl Solver {
    pub fn new(limits: SearchLimits) -> Solver {
        Solver {
            limits,
            table: Table::new(limits.table_capacity),
            nodes: 0,
            hits: 0,
            started: Instant::now(),
            sum_threshold: None,
        }
    }

    /// Decides split positions from summed component values when every
    /// component has at most `threshold` empty cells.
    pub fn with_sum_threshold(mut self, threshold: u32) -> Solver {
        self.sum_threshold = Some(threshold);
        self
    }

    pub fn nodes_visited(&self) -> u64 {
        self.nodes
    }

    pub fn table_hits(&self) -> u64 {
        self.hits
    }

    fn start(&mut self) {
        self.nodes = 0;
        self.hits = 0;
        self.started = Instant::now();
    }

    /// Whether `mover`, moving first in `pos`, makes the last move.
    pub fn wins_moving(&mut self, pos: &Position, mover: Player) -> Result<bool, Exhausted> {
        self.start();
        self.wins(pos, mover)
    }

    pub fn outcome(&mut self, pos: &Position) -> SearchResult {
        self.start();
        let answer = self.wins(pos, Player::Vertical).and_then(|v| {
            self.wins(pos, Player::Horizontal)
                .map(|h| OutcomeClass::from_first_moves(v, h))
        });
        SearchResult {
            outcome: answer.ok(),
            nodes_visited: self.nodes,
            table_hits: self.hits,
            elapsed: self.started.elapsed(),
            limits_hit: answer.err(),
        }
    }

    fn wins(&mut self, pos: &Position, mover: Player) -> Result<bool, Exhausted> {
        let moves = pos.move_masks(mover);
        if moves.is_empty() {
            return Ok(false);
        }
        let reply = mover.opponent();
        let replies = pos.move_masks(reply);
        if replies.is_empty() {
            return Ok(true);
        }
        // a move that leaves the opponent nothing wins at once
        if moves
            .iter()
            .any(|&m| replies.iter().all(|&r| r & m != 0))
        {
            return Ok(true);
        }
        let key = pos.canonical_key();
        let fp = keyed(key.fingerprint(), mover);
        if let Some(win) = self.table.get(fp) {
            self.hits += 1;
            return Ok(win);
        }
        self.nodes += 1;
        if self.nodes > self.limits.max_nodes {
            return Err(Exhausted::Nodes);
        }
        if self.nodes & 0xfff == 0 && self.started.elapsed() > self.limits.max_time {
            return Err(Exhausted::Time);
        }
        let before = self.nodes;
        if let Some(t) = self.sum_threshold {
            if key.parts.len() > 1 && key.parts.iter().all(|p| p.free.count_ones() <= t) {
                let g = value(pos, ValueLimits::default())?;
                let win = wins_from_value(g, mover);
                self.table.put(fp, win, 1);
                return Ok(win);
            }
        }
        let mut win = false;
        for m in ordered_moves(&moves, &replies) {
            if !self.wins(&pos.with_bits(m), reply)? {
                win = true;
                break;
            }
        }
        self.table.put(fp, win, self.nodes - before + 1);
        Ok(win)
    }
}

/// Moves that destroy the most opponent moves first; stable on ties.
pub(crate) fn ordered_moves(moves: &[u128], replies: &[u128]) -> SmallVec<[u128; 32]> {
    let mut scored: SmallVec<[(u32, u128); 32]> = moves
        .iter()
        .map(|&m| {
            let hit = replies.iter().filter(|&&r| r & m != 0).count() as u32;
            (hit, m)
        })
        .collect();
    scored.sort_by(|a, b| b.0.cmp(&a.0));
    scored.into_iter().map(|(_, m)| m).collect()
}

/// Whether `mover` wins moving first in a game of value `g`.
pub fn wins_from_value(g: GameValue, mover: Player) -> bool {
    let zero = GameValue::zero();
    match mover {
        Player::Vertical => !g.leq(zero),
        Player::Horizontal => !zero.leq(g),
    }
}

pub fn wins_moving(pos: &Position, mover: Player, limits: SearchLimits) -> Result<bool, Exhausted> {
    Solver::new(limits).wins_moving(pos, mover)
}

pub fn outcome(pos: &Position, limits: SearchLimits) -> SearchResult {
    Solver::new(limits).outcome(pos)
}

/// Searches the empty board. A limit hit gives a fact that knows nothing.
pub fn solve_board(spec: BoardSpec, limits: SearchLimits) -> Result<Fact, BoardError> {
    let pos = Position::empty(spec)?;
    let result = outcome(&pos, limits);
    Ok(Fact {
        key: spec,
        outcomes: result.outcome.map_or(OutcomeSet::ALL, OutcomeSet::single),
        provenance: Provenance::Searched {
            nodes: result.nodes_visited,
        },
    })
}

/// Largest board the oracle accepts, in empty cells.
pub const ORACLE_MAX_EMPTY: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{empty} empty cells is too many for the reference search (limit {ORACLE_MAX_EMPTY})")]
pub struct TooLargeForOracle {
    pub empty: u32,
}

/// Plain minimax with no table, symmetry or decomposition. Ground truth
/// for tests of the optimized solver.
pub fn oracle_outcome(pos: &Position) -> Result<OutcomeClass, TooLargeForOracle> {
    let empty = pos.empty_count();
    if empty > ORACLE_MAX_EMPTY {
        return Err(TooLargeForOracle { empty });
    }
    fn wins(pos: &Position, mover: Player) -> bool {
        pos.move_masks(mover)
            .into_iter()
            .any(|m| !wins(&pos.with_bits(m), mover.opponent()))
    }
    Ok(OutcomeClass::from_first_moves(
        wins(pos, Player::Vertical),
        wins(pos, Player::Horizontal),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::Topology;

    fn empty(t: Topology, w: u16, l: u16) -> Position {
        Position::empty(BoardSpec::with_topology(t, w, l)).unwrap()
    }

    fn solve(t: Topology, w: u16, l: u16) -> OutcomeClass {
        outcome(&empty(t, w, l), SearchLimits::default())
            .outcome
            .unwrap()
    }

    #[test]
    fn tiny_boards() {
        let lim = SearchLimits::default();
        let r = |w, l| empty(Topology::Rectangle, w, l);
        assert_eq!(wins_moving(&r(2, 2), Player::Vertical, lim), Ok(true));
        assert_eq!(wins_moving(&r(1, 1), Player::Vertical, lim), Ok(false));
        assert_eq!(wins_moving(&r(1, 1), Player::Horizontal, lim), Ok(false));
        assert_eq!(wins_moving(&r(1, 3), Player::Horizontal, lim), Ok(true));
        assert_eq!(oracle_outcome(&r(2, 2)), Ok(OutcomeClass::First));
        assert_eq!(oracle_outcome(&r(1, 2)), Ok(OutcomeClass::H));
        assert_eq!(oracle_outcome(&r(3, 3)), Ok(OutcomeClass::First));
    }

    #[test]
    fn known_outcomes() {
        use OutcomeClass::*;
        assert_eq!(solve(Topology::Rectangle, 3, 4), H);
        assert_eq!(solve(Topology::Rectangle, 5, 5), Second);
        assert_eq!(solve(Topology::Torus, 2, 5), Second);
        assert_eq!(solve(Topology::Torus, 4, 4), First);
    }

    #[test]
    fn limits_give_unknown() {
        let r = outcome(&empty(Topology::Rectangle, 9, 9), SearchLimits::nodes(1000));
        assert_eq!(r.outcome, None);
        assert_eq!(r.limits_hit, Some(Exhausted::Nodes));
        let f = solve_board(BoardSpec::rect(9, 9), SearchLimits::nodes(1000)).unwrap();
        assert!(f.is_unknown());
    }

    #[test]
    fn oracle_refuses_large_boards() {
        assert!(oracle_outcome(&empty(Topology::Rectangle, 3, 7)).is_err());
    }

    #[test]
    fn deterministic_counts() {
        let p = empty(Topology::Rectangle, 4, 5);
        let a = outcome(&p, SearchLimits::default());
        let b = outcome(&p, SearchLimits::default());
        assert_eq!((a.outcome, a.nodes_visited, a.table_hits), (b.outcome, b.nodes_visited, b.table_hits));
    }

    #[test]
    fn sum_path_agrees() {
        let p = empty(Topology::Rectangle, 2, 11)
            .apply_move(&"V f1:f2".parse().unwrap())
            .unwrap();
        for mover in [Player::Vertical, Player::Horizontal] {
            let plain = Solver::new(SearchLimits::default()).wins_moving(&p, mover);
            let summed = Solver::new(SearchLimits::default())
                .with_sum_threshold(DEFAULT_SUM_THRESHOLD)
                .wins_moving(&p, mover);
            assert_eq!(plain, summed);
        }
    }
}
