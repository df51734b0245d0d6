//! Strategy plans and how they pick moves.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::{Grid, Region};
use super::StrategyError;
use crate::board::{Cell, Move, Player, Position};
use crate::cgt::{value, GameValue, ValueLimits};
use crate::search::{SearchLimits, Solver};

/// When a strategy is guaranteed to win.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    WinMovingFirst,
    WinMovingSecond,
    WinAlways,
}

impl Role {
    pub fn from_flags(first: bool, second: bool) -> Option<Role> {
        match (first, second) {
            (true, true) => Some(Role::WinAlways),
            (true, false) => Some(Role::WinMovingFirst),
            (false, true) => Some(Role::WinMovingSecond),
            (false, false) => None,
        }
    }

    pub fn first(self) -> bool {
        self != Role::WinMovingSecond
    }

    pub fn second(self) -> bool {
        self != Role::WinMovingFirst
    }
}

/// Winning replies on a region, keyed by the region's occupied cells.
/// Moves are in the region's own coordinates.
pub type Table = Arc<HashMap<u128, Move>>;

#[derive(Clone)]
pub enum Plan {
    Base {
        region: Region,
        table: Table,
    },
    /// Reply in whichever part the opponent just played in; open in
    /// `lead` when moving first.
    Sum {
        parts: Vec<Plan>,
        lead: Option<usize>,
    },
    /// Answer a move in one square with its quarter turn in the other.
    Mirror {
        a: Region,
        b: Region,
    },
    /// Vera's opening domino across `column` of a width-2 board, after
    /// which the two sides are played as a sum.
    Split {
        column: u16,
        region: Region,
        parts: Vec<Plan>,
    },
    /// Search the region's position afresh before every move.
    Search {
        region: Region,
        limits: SearchLimits,
    },
    /// Play by exact values of the region's position.
    Value {
        region: Region,
        limits: ValueLimits,
        fallback: SearchLimits,
    },
    /// Play by the sum of the exact values of several regions.
    ValueSum {
        regions: Vec<Region>,
        limits: ValueLimits,
    },
}

impl Plan {
    pub fn region(&self) -> Region {
        match self {
            Plan::Base { region, .. }
            | Plan::Search { region, .. }
            | Plan::Value { region, .. }
            | Plan::Split { region, .. } => *region,
            Plan::Sum { parts, .. } => span(parts.iter().map(Plan::region)),
            Plan::Mirror { a, b } => span([*a, *b].into_iter()),
            Plan::ValueSum { regions, .. } => span(regions.iter().copied()),
        }
    }

    /// The same plan moved `offset` columns to the right.
    pub fn shifted(&self, offset: u16) -> Plan {
        let sh = |r: &Region| Region::new(r.start + offset, r.end + offset);
        match self {
            Plan::Base { region, table } => Plan::Base {
                region: sh(region),
                table: table.clone(),
            },
            Plan::Sum { parts, lead } => Plan::Sum {
                parts: parts.iter().map(|p| p.shifted(offset)).collect(),
                lead: *lead,
            },
            Plan::Mirror { a, b } => Plan::Mirror { a: sh(a), b: sh(b) },
            Plan::Search { region, limits } => Plan::Search {
                region: sh(region),
                limits: *limits,
            },
            Plan::Split {
                column,
                region,
                parts,
            } => Plan::Split {
                column: column + offset,
                region: sh(region),
                parts: parts.iter().map(|p| p.shifted(offset)).collect(),
            },
            Plan::Value {
                region,
                limits,
                fallback,
            } => Plan::Value {
                region: sh(region),
                limits: *limits,
                fallback: *fallback,
            },
            Plan::ValueSum { regions, limits } => Plan::ValueSum {
                regions: regions.iter().map(sh).collect(),
                limits: *limits,
            },
        }
    }

    /// The strategy's move for `player`, given the opponent's latest move
    /// (`None` when opening).
    pub fn next_move(
        &self,
        grid: &Grid,
        player: Player,
        last: Option<&Move>,
    ) -> Result<Move, StrategyError> {
        match self {
            Plan::Base { region, table } => {
                let local = grid.local(*region)?;
                table
                    .get(&local.occupied_bits())
                    .map(|mv| region.to_global(*mv))
                    .ok_or(StrategyError::OffTable)
            }
            Plan::Sum { parts, lead } => dispatch(parts, *lead, grid, player, last),
            Plan::Mirror { a, b } => {
                let mv = last.ok_or(StrategyError::OffTable)?;
                let n = a.len();
                let (from, to, turn): (Region, Region, fn(Cell, u16) -> Cell) = if a.contains(mv) {
                    (*a, *b, |c, n| Cell::new(c.col, n - 1 - c.row))
                } else if b.contains(mv) {
                    (*b, *a, |c, n| Cell::new(n - 1 - c.col, c.row))
                } else {
                    return Err(StrategyError::OffTable);
                };
                let local = from.to_local(*mv);
                let image = Move::new(player, turn(local.cells[0], n), turn(local.cells[1], n));
                Ok(to.to_global(image))
            }
            Plan::Split { column, parts, .. } => {
                let opening = Move::vertical(0, *column);
                if grid.check(&opening).is_ok() && player == Player::Vertical {
                    Ok(opening)
                } else {
                    dispatch(parts, None, grid, player, last)
                }
            }
            Plan::Search { region, limits } => {
                let local = grid.local(*region)?;
                Ok(region.to_global(search_play_move(&local, player, *limits)?))
            }
            Plan::Value {
                region,
                limits,
                fallback,
            } => {
                let local = grid.local(*region)?;
                let mv = match value_play_move(&local, player, *limits) {
                    Err(StrategyError::Exhausted(_)) => search_play_move(&local, player, *fallback)?,
                    other => other?,
                };
                Ok(region.to_global(mv))
            }
            Plan::ValueSum { regions, limits } => value_sum_move(regions, *limits, grid, player, last),
        }
    }

    /// Short description such as `sum[base(3x4) x2, base(3x5)]`.
    pub fn describe(&self) -> String {
        match self {
            Plan::Base { region, .. } => format!("base(len {})", region.len()),
            Plan::Sum { parts, .. } => format!("sum[{}]", runs(parts.iter().map(Plan::describe))),
            Plan::Mirror { a, .. } => format!("mirror({0}x{0} pair)", a.len()),
            Plan::Split { column, parts, .. } => format!(
                "split at column {} then [{}]",
                column + 1,
                runs(parts.iter().map(Plan::describe))
            ),
            Plan::Search { region, .. } => format!("search(len {})", region.len()),
            Plan::Value { region, .. } => format!("value(len {})", region.len()),
            Plan::ValueSum { regions, .. } => format!(
                "value-sum[{}]",
                runs(regions.iter().map(|r| format!("len {}", r.len())))
            ),
        }
    }
}

impl fmt::Debug for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

fn span(regions: impl Iterator<Item = Region>) -> Region {
    regions
        .reduce(|a, b| Region::new(a.start.min(b.start), a.end.max(b.end)))
        .unwrap_or(Region::new(0, 0))
}

/// Collapses repeated neighbours: `a, a, a, b` becomes `a x3, b`.
fn runs(items: impl Iterator<Item = String>) -> String {
    let mut out: Vec<(String, usize)> = Vec::new();
    for s in items {
        match out.last_mut() {
            Some((prev, n)) if *prev == s => *n += 1,
            _ => out.push((s, 1)),
        }
    }
    out.into_iter()
        .map(|(s, n)| if n > 1 { format!("{s} x{n}") } else { s })
        .collect::<Vec<_>>()
        .join(", ")
}

fn dispatch(
    parts: &[Plan],
    lead: Option<usize>,
    grid: &Grid,
    player: Player,
    last: Option<&Move>,
) -> Result<Move, StrategyError> {
    match last {
        Some(mv) => {
            // parts are ordered left to right
            let col = mv.cells[0].col;
            let i = parts.partition_point(|p| p.region().end <= col);
            match parts.get(i) {
                Some(p) if p.region().contains(mv) => p.next_move(grid, player, Some(mv)),
                _ => Err(StrategyError::OffTable),
            }
        }
        None => {
            let i = lead.ok_or(StrategyError::OffTable)?;
            parts[i].next_move(grid, player, None)
        }
    }
}

/// Whether the player who just moved wins with `g` left on the board.
fn mover_wins(g: GameValue, player: Player) -> bool {
    let zero = GameValue::zero();
    match player {
        Player::Vertical => zero.leq(g),
        Player::Horizontal => g.leq(zero),
    }
}

/// A move after which the exact value favours `player`: at most zero for
/// Hepzibah, at least zero for Vera. Ties go to the first move in cell
/// order.
pub fn value_play_move(
    pos: &Position,
    player: Player,
    limits: ValueLimits,
) -> Result<Move, StrategyError> {
    for mv in pos.legal_moves(player) {
        let next = pos.apply_move(&mv)?;
        if mover_wins(value(&next, limits)?, player) {
            return Ok(mv);
        }
    }
    Err(StrategyError::NoWinningMove)
}

/// Like [`value_play_move`], deciding each candidate by search.
pub fn search_play_move(
    pos: &Position,
    player: Player,
    limits: SearchLimits,
) -> Result<Move, StrategyError> {
    let mut solver = Solver::new(limits);
    for mv in pos.legal_moves(player) {
        let next = pos.apply_move(&mv)?;
        if !solver.wins_moving(&next, player.opponent())? {
            return Ok(mv);
        }
    }
    Err(StrategyError::NoWinningMove)
}

fn value_sum_move(
    regions: &[Region],
    limits: ValueLimits,
    grid: &Grid,
    player: Player,
    last: Option<&Move>,
) -> Result<Move, StrategyError> {
    let locals = regions
        .iter()
        .map(|r| grid.local(*r))
        .collect::<Result<Vec<_>, _>>()?;
    let values = locals
        .iter()
        .map(|p| value(p, limits))
        .collect::<Result<Vec<_>, _>>()?;
    let k = values.len();
    let mut prefix = vec![GameValue::zero(); k + 1];
    for i in 0..k {
        prefix[i + 1] = prefix[i].add(values[i]);
    }
    let mut suffix = vec![GameValue::zero(); k + 1];
    for i in (0..k).rev() {
        suffix[i] = suffix[i + 1].add(values[i]);
    }
    // reply where the opponent played first, then try the rest in order
    let first = last.and_then(|mv| regions.iter().position(|r| r.contains(mv)));
    let order = first.into_iter().chain((0..k).filter(|i| Some(*i) != first));
    for i in order {
        let rest = prefix[i].add(suffix[i + 1]);
        for mv in locals[i].legal_moves(player) {
            let next = locals[i].apply_move(&mv)?;
            if mover_wins(rest.add(value(&next, limits)?), player) {
                return Ok(regions[i].to_global(mv));
            }
        }
    }
    Err(StrategyError::NoWinningMove)
}
