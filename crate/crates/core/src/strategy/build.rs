//! Building strategies: tables from search, sums, mirrors, and the
//! per-width recipes.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Duration;

use super::grid::Region;
use super::plan::{Plan, Table};
use super::{Side, Strategy, StrategyError};
use crate::board::{BoardSpec, Player, Position, Topology};
use crate::cgt::ValueLimits;
use crate::knowledge::{tail_theorem, BoardKey, KnowledgeBase, TailCertificate};
use crate::outcome::{OutcomeClass, OutcomeSet};
use crate::search::{SearchLimits, Solver};

pub const SUPPORTED_WIDTHS: [u16; 7] = [2, 3, 4, 5, 7, 9, 11];

#[derive(Clone, Copy, Debug)]
pub struct PieceLimits {
    pub search: SearchLimits,
    /// Largest board given a move table.
    pub table_cells: usize,
    /// Largest board played by searching at every move.
    pub search_cells: usize,
    pub values: ValueLimits,
    /// How long a board played by value may take before falling back to
    /// search.
    pub value_attempt: Duration,
}

impl Default for PieceLimits {
    fn default() -> Self {
        PieceLimits {
            search: SearchLimits::default(),
            table_cells: 32,
            search_cells: 42,
            values: ValueLimits::default(),
            value_attempt: Duration::from_secs(5),
        }
    }
}

fn wins_first(o: OutcomeClass, p: Player) -> bool {
    o.wins_moving_first(p)
}

fn wins_second(o: OutcomeClass, p: Player) -> bool {
    o.wins_moving_second(p)
}

/// Winning moves for `player` on every position reachable while it
/// follows them, from the empty board and after each opening reply.
fn build_table(
    solver: &mut Solver,
    spec: BoardSpec,
    player: Player,
    first: bool,
    second: bool,
) -> Result<Table, StrategyError> {
    let empty = Position::empty(spec)?;
    let opp = player.opponent();
    let mut stack = Vec::new();
    if first {
        stack.push(empty);
    }
    if second {
        for m in empty.legal_moves(opp) {
            stack.push(empty.apply_move(&m)?);
        }
    }
    let mut table = HashMap::new();
    while let Some(p) = stack.pop() {
        if table.contains_key(&p.occupied_bits()) {
            continue;
        }
        let mut chosen = None;
        for mv in p.legal_moves(player) {
            let q = p.apply_move(&mv)?;
            if !solver.wins_moving(&q, opp)? {
                chosen = Some((mv, q));
                break;
            }
        }
        let Some((mv, q)) = chosen else {
            return Err(StrategyError::NoWinningMove);
        };
        table.insert(p.occupied_bits(), mv);
        for m in q.legal_moves(opp) {
            stack.push(q.apply_move(&m)?);
        }
    }
    Ok(Arc::new(table))
}

fn base_sides(spec: BoardSpec, player: Player, table: &Table, role: (bool, bool)) -> Vec<Side> {
    let plan = Plan::Base {
        region: Region::new(0, spec.length),
        table: table.clone(),
    };
    [(true, role.0), (false, role.1)]
        .into_iter()
        .filter(|(_, ok)| *ok)
        .map(|(moves_first, _)| Side {
            player,
            moves_first,
            plan: plan.clone(),
        })
        .collect()
}

/// A table strategy for `player` on `spec`, in whichever roles search
/// says it wins.
pub fn build_base_strategy(
    spec: BoardSpec,
    player: Player,
    limits: SearchLimits,
) -> Result<Strategy, StrategyError> {
    let mut solver = Solver::new(limits);
    let empty = Position::empty(spec)?;
    let first = solver.wins_moving(&empty, player)?;
    let second = !solver.wins_moving(&empty, player.opponent())?;
    if !first && !second {
        let opp_first = solver.wins_moving(&empty, player.opponent())?;
        let outcome = match player {
            Player::Vertical => OutcomeClass::from_first_moves(first, opp_first),
            Player::Horizontal => OutcomeClass::from_first_moves(opp_first, first),
        };
        return Err(StrategyError::NotAWin {
            spec,
            player,
            outcome: outcome.into(),
        });
    }
    let table = build_table(&mut solver, spec, player, first, second)?;
    Ok(Strategy {
        spec,
        sides: base_sides(spec, player, &table, (first, second)),
    })
}

/// Places the parts side by side, left to right, as one board. Only
/// Hepzibah can play such a sum: Vera's dominoes never cross a column
/// boundary, Hepzibah's could.
pub fn compose_sum(player: Player, parts: &[Strategy]) -> Result<Strategy, StrategyError> {
    if player != Player::Horizontal || parts.is_empty() {
        return Err(StrategyError::Uncertifiable);
    }
    let width = parts[0].spec.width;
    if parts
        .iter()
        .any(|p| p.spec.width != width || p.spec.topology != Topology::Rectangle)
    {
        return Err(StrategyError::Uncertifiable);
    }
    let mut offsets = Vec::new();
    let mut at = 0u16;
    for p in parts {
        offsets.push(at);
        at += p.spec.length;
    }
    let spec = BoardSpec::rect(width, at);
    let second_plans: Option<Vec<Plan>> = parts
        .iter()
        .zip(&offsets)
        .map(|(p, &o)| p.side(player, false).map(|s| s.plan.shifted(o)))
        .collect();
    let mut sides = Vec::new();
    let lead = (0..parts.len()).find(|&i| {
        parts[i].side(player, true).is_some()
            && parts
                .iter()
                .enumerate()
                .all(|(j, p)| j == i || p.side(player, false).is_some())
    });
    if let Some(i) = lead {
        let plans = parts
            .iter()
            .zip(&offsets)
            .enumerate()
            .map(|(j, (p, &o))| {
                let side = p.side(player, j == i).expect("checked above");
                side.plan.shifted(o)
            })
            .collect();
        sides.push(Side {
            player,
            moves_first: true,
            plan: Plan::Sum {
                parts: plans,
                lead: Some(i),
            },
        });
    }
    if let Some(plans) = second_plans {
        sides.push(Side {
            player,
            moves_first: false,
            plan: Plan::Sum {
                parts: plans,
                lead: None,
            },
        });
    }
    if sides.is_empty() {
        return Err(StrategyError::Uncertifiable);
    }
    Ok(Strategy { spec, sides })
}

/// Hepzibah's second-player win on two equal squares side by side.
pub fn mirror_strategy(a: BoardSpec, b: BoardSpec) -> Result<Strategy, StrategyError> {
    if a != b || !a.is_square() || a.topology != Topology::Rectangle {
        return Err(StrategyError::ComponentMismatch);
    }
    let n = a.width;
    Ok(Strategy {
        spec: BoardSpec::rect(n, 2 * n),
        sides: vec![Side {
            player: Player::Horizontal,
            moves_first: false,
            plan: Plan::Mirror {
                a: Region::new(0, n),
                b: Region::new(n, 2 * n),
            },
        }],
    })
}

#[derive(Clone, Copy, Debug)]
struct Piece {
    len: u16,
    first: bool,
    second: bool,
    kind: PieceKind,
}

#[derive(Clone, Copy, Debug)]
enum PieceKind {
    Table,
    Search,
    /// Played by value on the summands of a bound: the knowledge-base
    /// entries certifying each role.
    Bound {
        first: Option<usize>,
        second: Option<usize>,
    },
}

/// Builds strategies from a knowledge base, sharing tables between calls.
pub struct Recipes<'a> {
    kb: &'a KnowledgeBase,
    limits: PieceLimits,
    solver: Solver,
    tables: HashMap<(BoardSpec, Player), (Table, bool, bool)>,
    tails: HashMap<u16, Option<TailCertificate>>,
}

impl<'a> Recipes<'a> {
    pub fn new(kb: &'a KnowledgeBase, limits: PieceLimits) -> Self {
        Recipes {
            kb,
            limits,
            solver: Solver::new(limits.search),
            tables: HashMap::new(),
            tails: HashMap::new(),
        }
    }

    fn tail(&mut self, width: u16) -> Option<TailCertificate> {
        let kb = self.kb;
        *self
            .tails
            .entry(width)
            .or_insert_with(|| tail_theorem(kb, width).filter(|c| c.check(kb)))
    }

    /// What is known about `width x length`, tails included.
    pub fn known(&mut self, width: u16, length: u16) -> OutcomeSet {
        let set = self.kb.get(&BoardSpec::rect(width, length));
        if set == OutcomeSet::ALL && self.tail(width).is_some_and(|c| c.covers(length)) {
            return OutcomeClass::H.into();
        }
        set
    }

    fn table(&mut self, spec: BoardSpec, player: Player) -> Result<(Table, bool, bool), StrategyError> {
        if let Some(t) = self.tables.get(&(spec, player)) {
            return Ok(t.clone());
        }
        let empty = Position::empty(spec)?;
        let first = self.solver.wins_moving(&empty, player)?;
        let second = !self.solver.wins_moving(&empty, player.opponent())?;
        let table = build_table(&mut self.solver, spec, player, first, second)?;
        let entry = (table, first, second);
        self.tables.insert((spec, player), entry.clone());
        Ok(entry)
    }

    fn base_plan(
        &mut self,
        spec: BoardSpec,
        player: Player,
        first: bool,
    ) -> Result<Plan, StrategyError> {
        let (table, f, s) = self.table(spec, player)?;
        if (first && !f) || (!first && !s) {
            return Err(StrategyError::NotAWin {
                spec,
                player,
                outcome: self.kb.get(&spec),
            });
        }
        Ok(Plan::Base {
            region: Region::new(0, spec.length),
            table,
        })
    }

    /// Lengths of the boards summed in bound entry `entry` of `key`,
    /// left to right.
    fn leaves(&self, key: BoardKey, entry: usize, out: &mut Vec<u16>) {
        let e = &self.kb.bounds_for(&key)[entry];
        if e.from.is_empty() {
            out.push(key.length);
        }
        for (k, i) in &e.from {
            self.leaves(*k, *i, out);
        }
    }

    /// An upper bound on `key` proving Hepzibah's win in the role, with
    /// the fewest summands that all fit a position.
    fn certifying_bound(&self, key: BoardKey, first: bool) -> Option<usize> {
        let h = Player::Horizontal;
        self.kb
            .bounds_for(&key)
            .iter()
            .enumerate()
            .filter(|(_, e)| e.bound.is_upper())
            .filter(|(_, e)| {
                let c = e.bound.bound.outcome();
                if first {
                    wins_first(c, h)
                } else {
                    wins_second(c, h)
                }
            })
            .filter_map(|(i, _)| {
                let mut l = Vec::new();
                self.leaves(key, i, &mut l);
                let fits = l.iter().all(|&x| x as usize * key.width as usize <= crate::board::MAX_CELLS);
                fits.then_some((l.len(), i))
            })
            .min()
            .map(|(_, i)| i)
    }

    /// Hepzibah's pieces for boards of this width.
    fn pieces(&self, width: u16) -> Vec<Piece> {
        let h = Player::Horizontal;
        let mut out = Vec::new();
        let max = (self.limits.search_cells / width as usize) as u16;
        for len in 1..=max {
            if let Some(c) = self.kb.get(&BoardSpec::rect(width, len)).single_member() {
                if wins_first(c, h) || wins_second(c, h) {
                    out.push(Piece {
                        len,
                        first: wins_first(c, h),
                        second: wins_second(c, h),
                        kind: if (width * len) as usize <= self.limits.table_cells {
                            PieceKind::Table
                        } else {
                            PieceKind::Search
                        },
                    });
                }
            }
        }
        let mut keys: Vec<BoardKey> = self
            .kb
            .bound_keys()
            .filter(|k| k.topology == Topology::Rectangle && k.width == width && k.length > max)
            .copied()
            .collect();
        keys.sort();
        for key in keys {
            let first = self.certifying_bound(key, true);
            let second = self.certifying_bound(key, false);
            if first.is_some() || second.is_some() {
                out.push(Piece {
                    len: key.length,
                    first: first.is_some(),
                    second: second.is_some(),
                    kind: PieceKind::Bound { first, second },
                });
            }
        }
        out
    }

    /// Splits `n` into pieces: as many copies of the period piece as
    /// possible, then the fewest other pieces. Moving first needs exactly
    /// one piece Hepzibah wins moving first; all others must be wins for
    /// her moving second.
    fn decompose(&mut self, width: u16, n: u16, first: bool) -> Option<(Vec<Piece>, Option<usize>)> {
        let pieces = self.pieces(width);
        let period = self
            .tail(width)
            .map(|c| c.p)
            .or_else(|| pieces.iter().find(|p| p.first && p.second).map(|p| p.len));
        let n = n as usize;
        const INF: usize = usize::MAX / 2;
        // f0: only second-player pieces; f1: plus exactly one lead piece
        let mut f0 = vec![(INF, usize::MAX); n + 1];
        let mut f1 = vec![(INF, usize::MAX, false); n + 1];
        f0[0] = (0, usize::MAX);
        for r in 1..=n {
            for (i, p) in pieces.iter().enumerate() {
                let l = p.len as usize;
                if l > r {
                    continue;
                }
                if p.second && f0[r - l].0 + 1 < f0[r].0 {
                    f0[r] = (f0[r - l].0 + 1, i);
                }
                if p.second && f1[r - l].0 + 1 < f1[r].0 {
                    f1[r] = (f1[r - l].0 + 1, i, false);
                }
                if p.first && f0[r - l].0 + 1 < f1[r].0 {
                    f1[r] = (f0[r - l].0 + 1, i, true);
                }
            }
        }
        let unwind0 = |mut r: usize, out: &mut Vec<Piece>| {
            while r > 0 {
                let p = pieces[f0[r].1];
                out.push(p);
                r -= p.len as usize;
            }
        };
        let period_piece = period.and_then(|p| pieces.iter().copied().find(|q| q.len == p));
        let max_k = match period_piece {
            Some(p) if p.second => n / p.len as usize,
            _ => 0,
        };
        for k in (0..=max_k).rev() {
            let copies = period_piece.map(|p| vec![p; k]).unwrap_or_default();
            let r = n - k * period_piece.map_or(0, |p| p.len as usize);
            if !first {
                if f0[r].0 < INF {
                    let mut out = copies;
                    unwind0(r, &mut out);
                    return Some((out, None));
                }
                continue;
            }
            if k > 0 && period_piece.is_some_and(|p| p.first) && f0[r].0 < INF {
                let mut out = copies;
                unwind0(r, &mut out);
                return Some((out, Some(0)));
            }
            if f1[r].0 < INF {
                let mut out = copies;
                let mut lead = None;
                let mut rr = r;
                let mut one = true;
                while rr > 0 {
                    let (_, i, is_lead) = if one { f1[rr] } else { (f0[rr].0, f0[rr].1, false) };
                    let p = pieces[i];
                    if is_lead {
                        lead = Some(out.len());
                        one = false;
                    }
                    out.push(p);
                    rr -= p.len as usize;
                }
                return Some((out, lead));
            }
        }
        None
    }

    fn piece_plan(&mut self, width: u16, p: Piece, first: bool) -> Result<Plan, StrategyError> {
        let spec = BoardSpec::rect(width, p.len);
        let (f, s) = match p.kind {
            PieceKind::Table => return self.base_plan(spec, Player::Horizontal, first),
            PieceKind::Search => return Ok(self.search_plan(spec)),
            PieceKind::Bound { first, second } => (first, second),
        };
        let entry = if first { f } else { s }.ok_or(StrategyError::Uncertifiable)?;
        let mut lens = Vec::new();
        self.leaves(spec, entry, &mut lens);
        if lens.len() == 1 {
            return Ok(Plan::Value {
                region: Region::new(0, p.len),
                limits: ValueLimits {
                    max_time: self.limits.value_attempt,
                    ..self.limits.values
                },
                fallback: self.limits.search,
            });
        }
        let mut regions = Vec::new();
        let mut at = 0;
        for l in lens {
            regions.push(Region::new(at, at + l));
            at += l;
        }
        Ok(Plan::ValueSum {
            regions,
            limits: self.limits.values,
        })
    }

    fn sum_plan(&mut self, width: u16, n: u16, first: bool) -> Result<Option<Plan>, StrategyError> {
        let Some((pieces, lead)) = self.decompose(width, n, first) else {
            return Ok(None);
        };
        if pieces.len() == 1 {
            return self.piece_plan(width, pieces[0], first).map(Some);
        }
        let mut parts = Vec::with_capacity(pieces.len());
        let mut at = 0;
        for (i, p) in pieces.iter().enumerate() {
            parts.push(self.piece_plan(width, *p, lead == Some(i))?.shifted(at));
            at += p.len;
        }
        Ok(Some(Plan::Sum { parts, lead }))
    }

    fn search_plan(&self, spec: BoardSpec) -> Plan {
        Plan::Search {
            region: Region::new(0, spec.length),
            limits: self.limits.search,
        }
    }

    /// A table or live search for the whole board, when it is small enough.
    fn whole_board(&mut self, spec: BoardSpec, player: Player, first: bool) -> Result<Plan, StrategyError> {
        if spec.cells() <= self.limits.table_cells {
            return self.base_plan(spec, player, first);
        }
        if spec.cells() <= self.limits.search_cells {
            return Ok(self.search_plan(spec));
        }
        Err(StrategyError::Unavailable(spec))
    }

    fn hepzibah_plan(&mut self, width: u16, n: u16, first: bool) -> Result<Plan, StrategyError> {
        if let Some(p) = self.sum_plan(width, n, first)? {
            return Ok(p);
        }
        self.whole_board(BoardSpec::rect(width, n), Player::Horizontal, first)
    }

    fn vera_plan(&mut self, width: u16, n: u16, first: bool) -> Result<Plan, StrategyError> {
        let spec = BoardSpec::rect(width, n);
        if spec.cells() <= self.limits.table_cells {
            return self.base_plan(spec, Player::Vertical, first);
        }
        if width == 2 && first {
            // leftmost column whose domino leaves two boards Vera wins
            // moving second
            for c in 0..n {
                let (left, right) = (c, n - 1 - c);
                let ok = |s: &mut Self, len: u16| {
                    len == 0
                        || s.known(2, len)
                            .single_member()
                            .is_some_and(|o| wins_second(o, Player::Vertical))
                };
                if !ok(self, left) || !ok(self, right) {
                    continue;
                }
                let mut parts = Vec::new();
                if left > 0 {
                    parts.push(self.vera_plan(2, left, false)?);
                }
                if right > 0 {
                    parts.push(self.vera_plan(2, right, false)?.shifted(c + 1));
                }
                return Ok(Plan::Split {
                    column: c,
                    region: Region::new(0, n),
                    parts,
                });
            }
        }
        self.whole_board(spec, Player::Vertical, first)
    }

    pub fn plan(&mut self, player: Player, width: u16, n: u16, first: bool) -> Result<Plan, StrategyError> {
        match player {
            Player::Horizontal => self.hepzibah_plan(width, n, first),
            Player::Vertical => self.vera_plan(width, n, first),
        }
    }

    /// A strategy for the winner `claim` on `width x length`; for `First`
    /// and `Second` claims, one for each player.
    pub fn strategy_for(
        &mut self,
        width: u16,
        length: u16,
        claim: OutcomeClass,
    ) -> Result<Strategy, StrategyError> {
        if !SUPPORTED_WIDTHS.contains(&width) {
            return Err(StrategyError::UnsupportedWidth(width));
        }
        let spec = BoardSpec::rect(width, length);
        let known = self.known(width, length);
        if known.single_member() != Some(claim) {
            return Err(StrategyError::OutcomeMismatch {
                spec,
                known,
                claimed: claim.into(),
            });
        }
        let sides: &[(Player, bool)] = match claim {
            OutcomeClass::H => &[(Player::Horizontal, true), (Player::Horizontal, false)],
            OutcomeClass::V => &[(Player::Vertical, true), (Player::Vertical, false)],
            OutcomeClass::First => &[(Player::Vertical, true), (Player::Horizontal, true)],
            OutcomeClass::Second => &[(Player::Vertical, false), (Player::Horizontal, false)],
        };
        let mut out = Vec::new();
        for &(player, moves_first) in sides {
            out.push(Side {
                player,
                moves_first,
                plan: self.plan(player, width, length, moves_first)?,
            });
        }
        Ok(Strategy { spec, sides: out })
    }
}

/// [`Recipes::strategy_for`] with default limits.
pub fn strategy_for(
    kb: &KnowledgeBase,
    width: u16,
    length: u16,
    claim: OutcomeClass,
) -> Result<Strategy, StrategyError> {
    Recipes::new(kb, PieceLimits::default()).strategy_for(width, length, claim)
}
