//! Rectangle boards of any length, for play beyond the 128-cell limit of
//! [`Position`].

use std::fmt;

use crate::board::{BoardError, BoardSpec, Cell, IllegalMove, Move, Player, Position, Topology};

/// A run of whole columns `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region {
    pub start: u16,
    pub end: u16,
}

impl Region {
    pub fn new(start: u16, end: u16) -> Self {
        Region { start, end }
    }

    pub fn len(&self) -> u16 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains_col(&self, col: u16) -> bool {
        (self.start..self.end).contains(&col)
    }

    pub fn contains(&self, mv: &Move) -> bool {
        mv.cells.iter().all(|c| self.contains_col(c.col))
    }

    /// Shifts a move on the region's own board onto the full board.
    pub fn to_global(&self, mv: Move) -> Move {
        let shift = |c: Cell| Cell::new(c.row, c.col + self.start);
        Move::new(mv.player, shift(mv.cells[0]), shift(mv.cells[1]))
    }

    pub fn to_local(&self, mv: Move) -> Move {
        let shift = |c: Cell| Cell::new(c.row, c.col - self.start);
        Move::new(mv.player, shift(mv.cells[0]), shift(mv.cells[1]))
    }
}

/// Occupancy of a rectangle board, one bit per row in each column.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Grid {
    rows: u16,
    columns: Vec<u16>,
}

impl Grid {
    pub fn new(spec: BoardSpec) -> Result<Self, BoardError> {
        if spec.topology != Topology::Rectangle {
            return Err(BoardError::TopologyMismatch);
        }
        if spec.width > 16 {
            return Err(BoardError::UnsupportedTopology(spec.topology));
        }
        Ok(Grid {
            rows: spec.width,
            columns: vec![0; spec.length as usize],
        })
    }

    pub fn spec(&self) -> BoardSpec {
        BoardSpec::rect(self.rows, self.columns.len() as u16)
    }

    pub fn is_free(&self, c: Cell) -> bool {
        c.row < self.rows
            && (c.col as usize) < self.columns.len()
            && self.columns[c.col as usize] & (1 << c.row) == 0
    }

    pub fn check(&self, mv: &Move) -> Result<(), IllegalMove> {
        let [a, b] = mv.cells;
        for c in [a, b] {
            if c.row >= self.rows || c.col as usize >= self.columns.len() {
                return Err(IllegalMove::OutOfBounds(c));
            }
        }
        let shape = match (b.row - a.row, b.col - a.col) {
            (1, 0) => Player::Vertical,
            (0, 1) => Player::Horizontal,
            _ => return Err(IllegalMove::NotAdjacent(a, b)),
        };
        if shape != mv.player {
            return Err(IllegalMove::WrongOrientation(a, b, mv.player));
        }
        for c in [a, b] {
            if !self.is_free(c) {
                return Err(IllegalMove::Occupied(c));
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, mv: &Move) -> Result<(), IllegalMove> {
        self.check(mv)?;
        for c in mv.cells {
            self.columns[c.col as usize] |= 1 << c.row;
        }
        Ok(())
    }

    pub fn legal_moves(&self, player: Player) -> Vec<Move> {
        self.moves_in(player, Region::new(0, self.columns.len() as u16))
    }

    /// Moves lying wholly inside `region`, in cell order.
    pub fn moves_in(&self, player: Player, region: Region) -> Vec<Move> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in region.start..region.end {
                let mv = match player {
                    Player::Vertical if r + 1 < self.rows => Move::vertical(r, c),
                    Player::Horizontal if c + 1 < region.end => Move::horizontal(r, c),
                    _ => continue,
                };
                if self.check(&mv).is_ok() {
                    out.push(mv);
                }
            }
        }
        out
    }

    pub fn has_move(&self, player: Player) -> bool {
        let full = (1u32 << self.rows) - 1;
        match player {
            Player::Vertical => self.columns.iter().any(|&col| {
                let free = !col as u32 & full;
                free & (free >> 1) != 0
            }),
            Player::Horizontal => self
                .columns
                .windows(2)
                .any(|w| (!(w[0] | w[1]) as u32) & full != 0),
        }
    }

    /// The region as a board of its own.
    pub fn local(&self, region: Region) -> Result<Position, BoardError> {
        let spec = BoardSpec::rect(self.rows, region.len());
        let len = region.len() as usize;
        if self.rows as usize * len > crate::board::MAX_CELLS {
            return Err(BoardError::CapacityExceeded {
                cells: self.rows as usize * len,
            });
        }
        let mut occupied = 0u128;
        for (i, col) in self.columns[region.start as usize..region.end as usize]
            .iter()
            .enumerate()
        {
            for r in 0..self.rows as usize {
                if col & (1 << r) != 0 {
                    occupied |= 1u128 << (r * len + i);
                }
            }
        }
        Position::from_occupied(spec, occupied)
    }

    /// The whole board as a [`Position`], when it fits.
    pub fn position(&self) -> Result<Position, BoardError> {
        self.local(Region::new(0, self.columns.len() as u16))
    }

    pub fn from_position(pos: &Position) -> Result<Self, BoardError> {
        let mut g = Grid::new(pos.spec())?;
        for r in 0..g.rows {
            for c in 0..g.columns.len() as u16 {
                if pos.is_occupied(Cell::new(r, c)) {
                    g.columns[c as usize] |= 1 << r;
                }
            }
        }
        Ok(g)
    }

    /// Raw occupancy, used as a memo key for small boards.
    pub fn bits(&self) -> u128 {
        self.position().map_or(0, |p| p.occupied_bits())
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let line: String = self
                .columns
                .iter()
                .map(|col| if col & (1 << r) != 0 { '#' } else { '.' })
                .collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid({}x{})", self.rows, self.columns.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moves_and_regions() {
        let mut g = Grid::new(BoardSpec::rect(2, 1000)).unwrap();
        assert_eq!(g.legal_moves(Player::Vertical).len(), 1000);
        g.apply(&Move::vertical(0, 500)).unwrap();
        assert!(g.apply(&Move::horizontal(0, 499)).is_err());
        let r = Region::new(498, 502);
        assert_eq!(g.moves_in(Player::Horizontal, r).len(), 2);
        let local = g.local(r).unwrap();
        assert_eq!(local.empty_count(), 6);
        assert_eq!(
            r.to_global(Move::vertical(0, 2)),
            Move::vertical(0, 500)
        );
    }

    #[test]
    fn matches_position() {
        let spec = BoardSpec::rect(3, 5);
        let pos = Position::empty(spec)
            .unwrap()
            .apply_move(&Move::horizontal(1, 2))
            .unwrap();
        let g = Grid::from_position(&pos).unwrap();
        assert_eq!(g.position().unwrap(), pos);
        for p in [Player::Vertical, Player::Horizontal] {
            assert_eq!(g.legal_moves(p), pos.legal_moves(p));
            assert_eq!(g.has_move(p), pos.has_move(p));
        }
    }
}
