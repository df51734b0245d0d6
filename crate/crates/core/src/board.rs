//! Board geometry, move generation and symmetry reduction.
//!
//! Cells are indexed row-major with row 0 at the top and column 0 at the
//! left. The width of a board is its number of rows, the length its number
//! of columns. Vertical dominoes cover `(r, c)` and `(r + 1, c)`, horizontal
//! dominoes cover `(r, c)` and `(r, c + 1)`; glued edges add the wraparound
//! pairs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

/// Largest number of cells a [`Position`] can hold.
pub const MAX_CELLS: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    /// Vera, the Left player. Wins are positive.
    Vertical,
    /// Hepzibah, the Right player. Wins are negative.
    Horizontal,
}

impl Player {
    pub fn opponent(self) -> Self {
        match self {
            Player::Vertical => Player::Horizontal,
            Player::Horizontal => Player::Vertical,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Player::Vertical => 'V',
            Player::Horizontal => 'H',
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Player {
    type Err = BoardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "v" | "vertical" | "vera" | "left" => Ok(Player::Vertical),
            "h" | "horizontal" | "hepzibah" | "right" => Ok(Player::Horizontal),
            other => Err(BoardError::Parse(format!("unknown player `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Topology {
    #[serde(rename = "rect")]
    Rectangle,
    /// Left and right edges glued.
    #[serde(rename = "cyl-h")]
    CylinderH,
    /// Top and bottom edges glued.
    #[serde(rename = "cyl-v")]
    CylinderV,
    #[serde(rename = "torus")]
    Torus,
}

impl Topology {
    pub const ALL: [Topology; 4] = [
        Topology::Rectangle,
        Topology::CylinderH,
        Topology::CylinderV,
        Topology::Torus,
    ];

    pub fn wraps_rows(self) -> bool {
        matches!(self, Topology::CylinderV | Topology::Torus)
    }

    pub fn wraps_cols(self) -> bool {
        matches!(self, Topology::CylinderH | Topology::Torus)
    }

    pub fn from_wraps(rows: bool, cols: bool) -> Self {
        match (rows, cols) {
            (false, false) => Topology::Rectangle,
            (false, true) => Topology::CylinderH,
            (true, false) => Topology::CylinderV,
            (true, true) => Topology::Torus,
        }
    }

    /// Topology of the board after a quarter turn.
    pub fn transposed(self) -> Self {
        Topology::from_wraps(self.wraps_cols(), self.wraps_rows())
    }

    pub fn name(self) -> &'static str {
        match self {
            Topology::Rectangle => "rect",
            Topology::CylinderH => "cyl-h",
            Topology::CylinderV => "cyl-v",
            Topology::Torus => "torus",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Topology {
    type Err = BoardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rect" | "rectangle" => Ok(Topology::Rectangle),
            "cyl-h" | "cylh" | "cylinder-h" | "cylinderh" => Ok(Topology::CylinderH),
            "cyl-v" | "cylv" | "cylinder-v" | "cylinderv" => Ok(Topology::CylinderV),
            "torus" => Ok(Topology::Torus),
            other => Err(BoardError::Parse(format!("unknown topology `{other}`"))),
        }
    }
}

/// A board family member: topology plus dimensions. Doubles as the key of
/// knowledge-base facts, so it is not limited to [`MAX_CELLS`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoardSpec {
    pub topology: Topology,
    /// Number of rows.
    pub width: u16,
    /// Number of columns.
    pub length: u16,
}

impl BoardSpec {
    pub fn new(topology: Topology, width: u16, length: u16) -> Result<Self, BoardError> {
        if width == 0 || length == 0 {
            return Err(BoardError::ZeroDimension);
        }
        Ok(BoardSpec {
            topology,
            width,
            length,
        })
    }

    pub fn rect(width: u16, length: u16) -> Self {
        assert!(width > 0 && length > 0, "board dimensions must be positive");
        BoardSpec {
            topology: Topology::Rectangle,
            width,
            length,
        }
    }

    pub fn with_topology(topology: Topology, width: u16, length: u16) -> Self {
        assert!(width > 0 && length > 0, "board dimensions must be positive");
        BoardSpec {
            topology,
            width,
            length,
        }
    }

    pub fn cells(&self) -> usize {
        self.width as usize * self.length as usize
    }

    pub fn is_square(&self) -> bool {
        self.width == self.length
    }

    /// The quarter-turned board (players swap roles on it).
    pub fn transposed(&self) -> BoardSpec {
        BoardSpec {
            topology: self.topology.transposed(),
            width: self.length,
            length: self.width,
        }
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.row < self.width && cell.col < self.length
    }

    /// Horizontal concatenation: equal widths, lengths add.
    pub fn concat_h(a: BoardSpec, b: BoardSpec) -> Result<BoardSpec, BoardError> {
        if a.topology != Topology::Rectangle || b.topology != Topology::Rectangle {
            return Err(BoardError::TopologyMismatch);
        }
        if a.width != b.width {
            return Err(BoardError::DimensionMismatch {
                left: a,
                right: b,
            });
        }
        BoardSpec::new(Topology::Rectangle, a.width, a.length + b.length)
    }

    /// Vertical stacking: equal lengths, widths add.
    pub fn stack_v(a: BoardSpec, b: BoardSpec) -> Result<BoardSpec, BoardError> {
        if a.topology != Topology::Rectangle || b.topology != Topology::Rectangle {
            return Err(BoardError::TopologyMismatch);
        }
        if a.length != b.length {
            return Err(BoardError::DimensionMismatch {
                left: a,
                right: b,
            });
        }
        BoardSpec::new(Topology::Rectangle, a.width + b.width, a.length)
    }
}

impl fmt::Display for BoardSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}x{}", self.topology, self.width, self.length)
    }
}

impl FromStr for BoardSpec {
    type Err = BoardError;

    /// Parses `rect:2x13`, `torus:4x4` or a bare `3x5` (rectangle).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (topology, dims) = match s.split_once(':') {
            Some((t, d)) => (t.parse()?, d),
            None => (Topology::Rectangle, s),
        };
        let (w, l) = dims
            .split_once(['x', 'X'])
            .ok_or_else(|| BoardError::Parse(format!("expected WIDTHxLENGTH in `{s}`")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<u16>()
                .map_err(|_| BoardError::Parse(format!("bad dimension `{t}`")))
        };
        BoardSpec::new(topology, parse(w)?, parse(l)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: u16,
    pub col: u16,
}

impl Cell {
    pub fn new(row: u16, col: u16) -> Self {
        Cell { row, col }
    }
}

impl fmt::Display for Cell {
    /// Column letters (`a`..`z`, `aa`..) followed by the 1-based row.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut letters = Vec::new();
        let mut c = self.col as u32 + 1;
        while c > 0 {
            let rem = (c - 1) % 26;
            letters.push((b'a' + rem as u8) as char);
            c = (c - 1) / 26;
        }
        letters.reverse();
        let col: String = letters.into_iter().collect();
        write!(f, "{}{}", col, self.row as u32 + 1)
    }
}

impl FromStr for Cell {
    type Err = BoardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let split = s
            .find(|ch: char| ch.is_ascii_digit())
            .ok_or_else(|| BoardError::Parse(format!("bad cell `{s}`")))?;
        let (letters, digits) = s.split_at(split);
        if letters.is_empty() || !letters.chars().all(|ch| ch.is_ascii_alphabetic()) {
            return Err(BoardError::Parse(format!("bad cell `{s}`")));
        }
        let mut col: u32 = 0;
        for ch in letters.chars() {
            col = col * 26 + (ch.to_ascii_lowercase() as u32 - 'a' as u32 + 1);
        }
        let row: u32 = digits
            .parse()
            .map_err(|_| BoardError::Parse(format!("bad cell `{s}`")))?;
        if row == 0 || col == 0 || row > u16::MAX as u32 || col > u16::MAX as u32 {
            return Err(BoardError::Parse(format!("bad cell `{s}`")));
        }
        Ok(Cell::new((row - 1) as u16, (col - 1) as u16))
    }
}

/// A domino placement. The two cells are stored in ascending order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Move {
    pub player: Player,
    pub cells: [Cell; 2],
}

impl Move {
    pub fn new(player: Player, a: Cell, b: Cell) -> Self {
        let cells = if a <= b { [a, b] } else { [b, a] };
        Move { player, cells }
    }

    pub fn vertical(row: u16, col: u16) -> Self {
        Move::new(Player::Vertical, Cell::new(row, col), Cell::new(row + 1, col))
    }

    pub fn horizontal(row: u16, col: u16) -> Self {
        Move::new(Player::Horizontal, Cell::new(row, col), Cell::new(row, col + 1))
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}:{}", self.player, self.cells[0], self.cells[1])
    }
}

impl FromStr for Move {
    type Err = BoardError;

    /// Parses transcript notation such as `V a1:a2` or `H c2:d2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split_whitespace();
        let player: Player = parts
            .next()
            .ok_or_else(|| BoardError::Parse("empty move".into()))?
            .parse()?;
        let cells = parts
            .next()
            .ok_or_else(|| BoardError::Parse(format!("missing cells in `{s}`")))?;
        if parts.next().is_some() {
            return Err(BoardError::Parse(format!("trailing input in `{s}`")));
        }
        let (a, b) = cells
            .split_once(':')
            .ok_or_else(|| BoardError::Parse(format!("expected CELL:CELL in `{s}`")))?;
        Ok(Move::new(player, a.parse()?, b.parse()?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum IllegalMove {
    #[error("cell {0} is outside the board")]
    OutOfBounds(Cell),
    #[error("cell {0} is occupied")]
    Occupied(Cell),
    #[error("cells {0} and {1} are not adjacent")]
    NotAdjacent(Cell, Cell),
    #[error("cells {0} and {1} do not match the {2} player's orientation")]
    WrongOrientation(Cell, Cell, Player),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BoardError {
    #[error("board dimensions must be positive")]
    ZeroDimension,
    #[error("board has {cells} cells, more than the supported {MAX_CELLS}")]
    CapacityExceeded { cells: usize },
    #[error("dimension mismatch between {left} and {right}")]
    DimensionMismatch { left: BoardSpec, right: BoardSpec },
    #[error("operation requires rectangle boards")]
    TopologyMismatch,
    #[error("operation unsupported for topology {0} with these dimensions")]
    UnsupportedTopology(Topology),
    #[error("illegal move: {0}")]
    IllegalMove(#[from] IllegalMove),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Bit masks describing one board shape, shared by move generation.
#[derive(Clone, Copy, Debug)]
struct Geometry {
    rows: u32,
    cols: u32,
    /// Cells whose downward neighbour exists without wrapping.
    not_last_row: u128,
    /// Cells whose rightward neighbour exists without wrapping.
    not_last_col: u128,
    first_row: u128,
    first_col: u128,
    wrap_rows: bool,
    wrap_cols: bool,
}

fn low_bits(n: u32) -> u128 {
    if n >= 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

impl Geometry {
    fn of(spec: &BoardSpec) -> Geometry {
        let rows = spec.width as u32;
        let cols = spec.length as u32;
        let all = low_bits(rows * cols);
        let first_row = low_bits(cols);
        let mut first_col = 0u128;
        for r in 0..rows {
            first_col |= 1u128 << (r * cols);
        }
        let last_col = first_col << (cols - 1);
        Geometry {
            rows,
            cols,
            not_last_row: low_bits((rows - 1) * cols),
            not_last_col: all & !last_col,
            first_row,
            first_col,
            // Wrapping over one or two cells adds no new adjacency.
            wrap_rows: spec.topology.wraps_rows() && rows > 2,
            wrap_cols: spec.topology.wraps_cols() && cols > 2,
        }
    }

    /// Bit `i` set means the pair starting at cell `i` is available.
    /// Returns (direct pairs, wrap pairs); the partner of direct bit `i` is
    /// `i + stride`, the partner of wrap bit `i` is `i + wrap_stride`.
    fn pair_bits(&self, free: u128, player: Player) -> PairBits {
        match player {
            Player::Vertical => {
                let direct = if self.rows > 1 {
                    free & (free >> self.cols) & self.not_last_row
                } else {
                    0
                };
                let wrap_stride = (self.rows - 1) * self.cols;
                let wrap = if self.wrap_rows {
                    free & (free >> wrap_stride) & self.first_row
                } else {
                    0
                };
                PairBits {
                    direct,
                    stride: self.cols,
                    wrap,
                    wrap_stride,
                }
            }
            Player::Horizontal => {
                let direct = if self.cols > 1 {
                    free & (free >> 1) & self.not_last_col
                } else {
                    0
                };
                let wrap_stride = self.cols - 1;
                let wrap = if self.wrap_cols {
                    free & (free >> wrap_stride) & self.first_col
                } else {
                    0
                };
                PairBits {
                    direct,
                    stride: 1,
                    wrap,
                    wrap_stride,
                }
            }
        }
    }
}

struct PairBits {
    direct: u128,
    stride: u32,
    wrap: u128,
    wrap_stride: u32,
}

impl PairBits {
    fn count(&self) -> u32 {
        self.direct.count_ones() + self.wrap.count_ones()
    }

    fn for_each(&self, mut f: impl FnMut(u128)) {
        let mut d = self.direct;
        while d != 0 {
            let i = d.trailing_zeros();
            d &= d - 1;
            f((1u128 << i) | (1u128 << (i + self.stride)));
        }
        let mut w = self.wrap;
        while w != 0 {
            let i = w.trailing_zeros();
            w &= w - 1;
            f((1u128 << i) | (1u128 << (i + self.wrap_stride)));
        }
    }
}

/// A board with some cells covered. Positions are small immutable values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Position {
    spec: BoardSpec,
    occupied: u128,
}

impl Position {
    pub fn empty(spec: BoardSpec) -> Result<Self, BoardError> {
        if spec.width == 0 || spec.length == 0 {
            return Err(BoardError::ZeroDimension);
        }
        if spec.cells() > MAX_CELLS {
            return Err(BoardError::CapacityExceeded {
                cells: spec.cells(),
            });
        }
        Ok(Position { spec, occupied: 0 })
    }

    pub fn from_occupied(spec: BoardSpec, occupied: u128) -> Result<Self, BoardError> {
        let pos = Position::empty(spec)?;
        if occupied & !pos.all_bits() != 0 {
            let i = (128 - (occupied & !pos.all_bits()).leading_zeros() - 1) as usize;
            return Err(BoardError::IllegalMove(IllegalMove::OutOfBounds(
                pos.cell_of(i),
            )));
        }
        Ok(Position { spec, occupied })
    }

    pub fn with_cells(spec: BoardSpec, cells: &[Cell]) -> Result<Self, BoardError> {
        let mut pos = Position::empty(spec)?;
        for &cell in cells {
            let i = pos.index_of(cell)?;
            pos.occupied |= 1u128 << i;
        }
        Ok(pos)
    }

    pub fn spec(&self) -> BoardSpec {
        self.spec
    }

    pub fn occupied_bits(&self) -> u128 {
        self.occupied
    }

    pub fn all_bits(&self) -> u128 {
        low_bits(self.spec.cells() as u32)
    }

    pub fn free_bits(&self) -> u128 {
        self.all_bits() & !self.occupied
    }

    pub fn empty_count(&self) -> u32 {
        self.free_bits().count_ones()
    }

    pub fn index_of(&self, cell: Cell) -> Result<usize, BoardError> {
        if !self.spec.contains(cell) {
            return Err(IllegalMove::OutOfBounds(cell).into());
        }
        Ok(cell.row as usize * self.spec.length as usize + cell.col as usize)
    }

    pub fn cell_of(&self, index: usize) -> Cell {
        let cols = self.spec.length as usize;
        Cell::new((index / cols) as u16, (index % cols) as u16)
    }

    pub fn is_occupied(&self, cell: Cell) -> bool {
        match self.index_of(cell) {
            Ok(i) => self.occupied >> i & 1 == 1,
            Err(_) => false,
        }
    }

    /// Occupies cells given as a bit mask, without legality checks.
    pub fn with_bits(&self, bits: u128) -> Position {
        Position {
            spec: self.spec,
            occupied: self.occupied | (bits & self.all_bits()),
        }
    }

    /// Two-cell masks of every legal move for `player`.
    pub fn move_masks(&self, player: Player) -> SmallVec<[u128; 32]> {
        let mut out = SmallVec::new();
        Geometry::of(&self.spec)
            .pair_bits(self.free_bits(), player)
            .for_each(|m| out.push(m));
        out
    }

    pub fn move_count(&self, player: Player) -> u32 {
        Geometry::of(&self.spec)
            .pair_bits(self.free_bits(), player)
            .count()
    }

    pub fn has_move(&self, player: Player) -> bool {
        self.move_count(player) > 0
    }

    /// Converts a two-cell mask produced by [`Position::move_masks`].
    pub fn move_from_mask(&self, player: Player, mask: u128) -> Move {
        let a = mask.trailing_zeros() as usize;
        let b = 127 - mask.leading_zeros() as usize;
        Move::new(player, self.cell_of(a), self.cell_of(b))
    }

    pub fn mask_of(&self, mv: &Move) -> Result<u128, BoardError> {
        let a = self.index_of(mv.cells[0])?;
        let b = self.index_of(mv.cells[1])?;
        Ok((1u128 << a) | (1u128 << b))
    }

    pub fn legal_moves(&self, player: Player) -> Vec<Move> {
        let mut moves: Vec<Move> = self
            .move_masks(player)
            .into_iter()
            .map(|m| self.move_from_mask(player, m))
            .collect();
        moves.sort();
        moves
    }

    /// Checks that `mv` is legal here, naming the violated condition.
    pub fn check_move(&self, mv: &Move) -> Result<u128, IllegalMove> {
        let [a, b] = mv.cells;
        for cell in [a, b] {
            if !self.spec.contains(cell) {
                return Err(IllegalMove::OutOfBounds(cell));
            }
        }
        if !cells_adjacent(&self.spec, a, b) {
            return Err(IllegalMove::NotAdjacent(a, b));
        }
        if orientation_of(&self.spec, a, b) != Some(mv.player) {
            return Err(IllegalMove::WrongOrientation(a, b, mv.player));
        }
        for cell in [a, b] {
            if self.is_occupied(cell) {
                return Err(IllegalMove::Occupied(cell));
            }
        }
        Ok(self.mask_of(mv).expect("cells checked in bounds"))
    }

    pub fn apply_move(&self, mv: &Move) -> Result<Position, BoardError> {
        let mask = self.check_move(mv)?;
        Ok(Position {
            spec: self.spec,
            occupied: self.occupied | mask,
        })
    }

    fn neighbours(&self, geo: &Geometry, i: u32) -> SmallVec<[u32; 4]> {
        let (r, c) = (i / geo.cols, i % geo.cols);
        let mut out = SmallVec::new();
        let rows_wrap = self.spec.topology.wraps_rows();
        let cols_wrap = self.spec.topology.wraps_cols();
        let mut push = |rr: u32, cc: u32| {
            let j = rr * geo.cols + cc;
            if j != i && !out.contains(&j) {
                out.push(j);
            }
        };
        if r + 1 < geo.rows {
            push(r + 1, c);
        } else if rows_wrap {
            push(0, c);
        }
        if r > 0 {
            push(r - 1, c);
        } else if rows_wrap {
            push(geo.rows - 1, c);
        }
        if c + 1 < geo.cols {
            push(r, c + 1);
        } else if cols_wrap {
            push(r, 0);
        }
        if c > 0 {
            push(r, c - 1);
        } else if cols_wrap {
            push(r, geo.cols - 1);
        }
        out
    }

    /// Connected regions of empty cells as bit masks over this board.
    pub fn component_masks(&self) -> SmallVec<[u128; 4]> {
        let geo = Geometry::of(&self.spec);
        let mut remaining = self.free_bits();
        let mut out = SmallVec::new();
        while remaining != 0 {
            let seed = remaining.trailing_zeros();
            let mut comp = 1u128 << seed;
            let mut frontier = comp;
            remaining &= !comp;
            while frontier != 0 {
                let i = frontier.trailing_zeros();
                frontier &= frontier - 1;
                for j in self.neighbours(&geo, i) {
                    let bit = 1u128 << j;
                    if remaining & bit != 0 {
                        remaining &= !bit;
                        comp |= bit;
                        frontier |= bit;
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    /// Connected components of the empty cells, each cut out as its own
    /// minimal board. A glued dimension is kept only when the component
    /// meets every row (or column) of it; otherwise the board is unrolled
    /// at an unused line. Gluing over at most two lines is dropped since it
    /// adds no adjacency.
    pub fn components(&self) -> Vec<Position> {
        self.component_masks()
            .into_iter()
            .map(|m| self.extract(m))
            .collect()
    }

    fn extract(&self, comp: u128) -> Position {
        let rows = self.spec.width as u32;
        let cols = self.spec.length as u32;
        let mut row_used = [false; MAX_CELLS];
        let mut col_used = [false; MAX_CELLS];
        let mut bits = comp;
        while bits != 0 {
            let i = bits.trailing_zeros();
            bits &= bits - 1;
            row_used[(i / cols) as usize] = true;
            col_used[(i % cols) as usize] = true;
        }
        let (row_map, height, keep_rows) =
            axis_layout(&row_used[..rows as usize], self.spec.topology.wraps_rows());
        let (col_map, width, keep_cols) =
            axis_layout(&col_used[..cols as usize], self.spec.topology.wraps_cols());
        let spec = BoardSpec {
            topology: Topology::from_wraps(keep_rows, keep_cols),
            width: height as u16,
            length: width as u16,
        };
        let mut free = 0u128;
        let mut bits = comp;
        while bits != 0 {
            let i = bits.trailing_zeros();
            bits &= bits - 1;
            let r = row_map[(i / cols) as usize];
            let c = col_map[(i % cols) as usize];
            free |= 1u128 << (r * width + c);
        }
        let all = low_bits(height * width);
        Position {
            spec,
            occupied: all & !free,
        }
    }

    /// Quarter turn: cell (r, c) goes to (c, width - 1 - r). Vertical
    /// dominoes become horizontal ones, so the game is negated.
    pub fn rot90(&self) -> Result<Position, BoardError> {
        if self.spec.topology != Topology::Rectangle && !self.spec.is_square() {
            return Err(BoardError::UnsupportedTopology(self.spec.topology));
        }
        let w = self.spec.width as u32;
        let l = self.spec.length as u32;
        let mut occupied = 0u128;
        let mut bits = self.occupied;
        while bits != 0 {
            let i = bits.trailing_zeros();
            bits &= bits - 1;
            let (r, c) = (i / l, i % l);
            let (nr, nc) = (c, w - 1 - r);
            occupied |= 1u128 << (nr * w + nc);
        }
        Ok(Position {
            spec: self.spec.transposed(),
            occupied,
        })
    }

    /// Key identifying this position up to translation of each component,
    /// reflections, half turns and cyclic shifts along glued edges.
    /// Components where neither player can move are dropped.
    pub fn canonical_key(&self) -> CanonicalKey {
        let mut parts: SmallVec<[ComponentKey; 4]> = self
            .components()
            .into_iter()
            .filter(|c| c.has_move(Player::Vertical) || c.has_move(Player::Horizontal))
            .map(|c| ComponentKey::of(&c))
            .collect();
        parts.sort_unstable();
        CanonicalKey { parts }
    }
}

impl fmt::Display for Position {
    /// Rows top to bottom, `#` for covered cells and `.` for empty ones.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.spec.width {
            for c in 0..self.spec.length {
                let ch = if self.is_occupied(Cell::new(r, c)) {
                    '#'
                } else {
                    '.'
                };
                write!(f, "{ch}")?;
            }
            if r + 1 < self.spec.width {
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

/// Maps used lines of one axis onto a compact range. Returns the map, the
/// new extent and whether the axis stays glued.
fn axis_layout(used: &[bool], wraps: bool) -> (Vec<u32>, u32, bool) {
    let n = used.len();
    let wraps = wraps && n > 2;
    let mut map = vec![0u32; n];
    if wraps {
        match used.iter().position(|&u| !u) {
            None => {
                for (i, m) in map.iter_mut().enumerate() {
                    *m = i as u32;
                }
                return (map, n as u32, true);
            }
            Some(gap) => {
                // Unroll so the line after the gap comes first.
                let shifted: Vec<usize> = (0..n).map(|i| (i + n - gap - 1) % n).collect();
                let lo = (0..n).filter(|&i| used[i]).map(|i| shifted[i]).min().unwrap_or(0);
                let hi = (0..n).filter(|&i| used[i]).map(|i| shifted[i]).max().unwrap_or(0);
                for i in 0..n {
                    map[i] = shifted[i].saturating_sub(lo) as u32;
                }
                return (map, (hi - lo + 1) as u32, false);
            }
        }
    }
    let lo = used.iter().position(|&u| u).unwrap_or(0);
    let hi = used.iter().rposition(|&u| u).unwrap_or(0);
    for (i, m) in map.iter_mut().enumerate() {
        *m = i.saturating_sub(lo) as u32;
    }
    (map, (hi - lo + 1) as u32, false)
}

fn line_adjacent(a: u16, b: u16, n: u16, wraps: bool) -> bool {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    hi == lo + 1 || (wraps && n > 2 && lo == 0 && hi == n - 1)
}

fn cells_adjacent(spec: &BoardSpec, a: Cell, b: Cell) -> bool {
    (a.col == b.col && line_adjacent(a.row, b.row, spec.width, spec.topology.wraps_rows()))
        || (a.row == b.row && line_adjacent(a.col, b.col, spec.length, spec.topology.wraps_cols()))
}

fn orientation_of(spec: &BoardSpec, a: Cell, b: Cell) -> Option<Player> {
    if a.col == b.col && line_adjacent(a.row, b.row, spec.width, spec.topology.wraps_rows()) {
        Some(Player::Vertical)
    } else if a.row == b.row
        && line_adjacent(a.col, b.col, spec.length, spec.topology.wraps_cols())
    {
        Some(Player::Horizontal)
    } else {
        None
    }
}

/// One component in normal form: the least free-cell mask over its
/// symmetry class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComponentKey {
    pub topology: Topology,
    pub rows: u8,
    pub cols: u8,
    pub free: u128,
}

impl ComponentKey {
    pub fn of(pos: &Position) -> ComponentKey {
        let spec = pos.spec();
        let rows = spec.width as u32;
        let cols = spec.length as u32;
        let free = pos.free_bits();
        let row_shifts = if spec.topology.wraps_rows() { rows } else { 1 };
        let col_shifts = if spec.topology.wraps_cols() { cols } else { 1 };
        let mut best = u128::MAX;
        for flip_r in [false, true] {
            for flip_c in [false, true] {
                for sr in 0..row_shifts {
                    for sc in 0..col_shifts {
                        let mut out = 0u128;
                        let mut bits = free;
                        while bits != 0 {
                            let i = bits.trailing_zeros();
                            bits &= bits - 1;
                            let (mut r, mut c) = (i / cols, i % cols);
                            if flip_r {
                                r = rows - 1 - r;
                            }
                            if flip_c {
                                c = cols - 1 - c;
                            }
                            r = (r + sr) % rows;
                            c = (c + sc) % cols;
                            out |= 1u128 << (r * cols + c);
                        }
                        best = best.min(out);
                    }
                }
            }
        }
        ComponentKey {
            topology: spec.topology,
            rows: rows as u8,
            cols: cols as u8,
            free: best,
        }
    }

    /// The normal-form component as a position.
    pub fn position(&self) -> Position {
        let spec = BoardSpec::with_topology(self.topology, self.rows as u16, self.cols as u16);
        let all = low_bits(spec.cells() as u32);
        Position {
            spec,
            occupied: all & !self.free,
        }
    }
}

/// Exact symmetry-reduced key: the sorted multiset of component keys.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey {
    pub parts: SmallVec<[ComponentKey; 4]>,
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl CanonicalKey {
    pub fn is_terminal(&self) -> bool {
        self.parts.is_empty()
    }

    /// 128-bit fingerprint used by lossy transposition tables. Two
    /// independent 64-bit lanes make accidental collisions negligible at
    /// desk scale (below 2^-64 per probe).
    pub fn fingerprint(&self) -> u128 {
        let mut a: u64 = 0x243f_6a88_85a3_08d3;
        let mut b: u64 = 0x1319_8a2e_0370_7344;
        for p in &self.parts {
            let header = (p.topology as u64) << 16 | (p.rows as u64) << 8 | p.cols as u64;
            for word in [header, p.free as u64, (p.free >> 64) as u64] {
                a = mix64(a ^ word);
                b = mix64(b.rotate_left(17) ^ word.wrapping_mul(0xff51_afd7_ed55_8ccd));
            }
        }
        (a as u128) << 64 | b as u128
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty(t: Topology, w: u16, l: u16) -> Position {
        Position::empty(BoardSpec::with_topology(t, w, l)).unwrap()
    }

    #[test]
    fn move_counts_small_boards() {
        let p = empty(Topology::Rectangle, 2, 2);
        assert_eq!(p.legal_moves(Player::Vertical).len(), 2);
        let p = empty(Topology::Rectangle, 1, 1);
        assert!(p.legal_moves(Player::Vertical).is_empty());
        assert!(p.legal_moves(Player::Horizontal).is_empty());
        let t = empty(Topology::Torus, 2, 3);
        let h = t.legal_moves(Player::Horizontal);
        assert_eq!(h.len(), 6);
        assert!(h.contains(&Move::new(
            Player::Horizontal,
            Cell::new(0, 0),
            Cell::new(0, 2)
        )));
        // two rows glued top to bottom: the wrap pair is the direct pair
        assert_eq!(t.legal_moves(Player::Vertical).len(), 3);
    }

    #[test]
    fn move_count_formulas() {
        for m in 1..=6u16 {
            for n in 1..=6u16 {
                let p = empty(Topology::Rectangle, m, n);
                assert_eq!(p.move_count(Player::Vertical), ((m - 1) * n) as u32);
                assert_eq!(p.move_count(Player::Horizontal), (m * (n - 1)) as u32);
                if m >= 3 && n >= 3 {
                    let t = empty(Topology::Torus, m, n);
                    assert_eq!(t.move_count(Player::Vertical), (m * n) as u32);
                    assert_eq!(t.move_count(Player::Horizontal), (m * n) as u32);
                }
            }
        }
    }

    #[test]
    fn apply_move_examples() {
        let p = empty(Topology::Rectangle, 2, 2);
        let q = p.apply_move(&Move::vertical(0, 0)).unwrap();
        assert!(q.is_occupied(Cell::new(0, 0)) && q.is_occupied(Cell::new(1, 0)));
        assert!(!p.is_occupied(Cell::new(0, 0)));

        let full = empty(Topology::Rectangle, 2, 1)
            .apply_move(&Move::vertical(0, 0))
            .unwrap();
        assert_eq!(full.empty_count(), 0);

        let q = p.apply_move(&Move::horizontal(0, 0)).unwrap();
        let err = q.apply_move(&Move::vertical(0, 0)).unwrap_err();
        assert_eq!(
            err,
            BoardError::IllegalMove(IllegalMove::Occupied(Cell::new(0, 0)))
        );
    }

    #[test]
    fn illegal_move_reasons() {
        let p = empty(Topology::Rectangle, 3, 3);
        let wrong = Move::new(Player::Horizontal, Cell::new(0, 0), Cell::new(1, 0));
        assert!(matches!(
            p.check_move(&wrong),
            Err(IllegalMove::WrongOrientation(..))
        ));
        let far = Move::new(Player::Vertical, Cell::new(0, 0), Cell::new(2, 0));
        assert!(matches!(p.check_move(&far), Err(IllegalMove::NotAdjacent(..))));
        let out = Move::new(Player::Vertical, Cell::new(2, 0), Cell::new(3, 0));
        assert!(matches!(p.check_move(&out), Err(IllegalMove::OutOfBounds(..))));
        // the same pair is fine once the rows are glued
        let t = empty(Topology::CylinderV, 3, 3);
        assert!(t.check_move(&far).is_ok());
    }

    #[test]
    fn components_split_and_wrap() {
        let p = empty(Topology::Rectangle, 2, 5)
            .apply_move(&Move::vertical(0, 2))
            .unwrap();
        let comps = p.components();
        assert_eq!(comps.len(), 2);
        for c in &comps {
            assert_eq!(c.spec(), BoardSpec::rect(2, 2));
            assert_eq!(c.empty_count(), 4);
        }
        assert_eq!(empty(Topology::Rectangle, 3, 4).components().len(), 1);

        let t = empty(Topology::Torus, 2, 3)
            .apply_move(&Move::vertical(0, 0))
            .unwrap();
        let comps = t.components();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].spec(), BoardSpec::rect(2, 2));
        assert_eq!(comps[0].empty_count(), 4);
    }

    #[test]
    fn torus_component_unrolls_across_seam() {
        // a 3x4 torus with column 1 filled: the rest wraps through column 0
        let spec = BoardSpec::with_topology(Topology::Torus, 3, 4);
        let cells: Vec<Cell> = (0..3).map(|r| Cell::new(r, 1)).collect();
        let p = Position::with_cells(spec, &cells).unwrap();
        let comps = p.components();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].spec().topology, Topology::CylinderV);
        assert_eq!(comps[0].spec().width, 3);
        assert_eq!(comps[0].spec().length, 3);
        assert_eq!(comps[0].empty_count(), 9);
    }

    #[test]
    fn canonical_key_symmetries() {
        let a = empty(Topology::Rectangle, 3, 4)
            .apply_move(&Move::vertical(0, 0))
            .unwrap();
        let b = empty(Topology::Rectangle, 3, 4)
            .apply_move(&Move::vertical(1, 0))
            .unwrap();
        assert_eq!(a.canonical_key(), b.canonical_key());

        let t = empty(Topology::Torus, 2, 3)
            .apply_move(&Move::horizontal(0, 0))
            .unwrap();
        let u = empty(Topology::Torus, 2, 3)
            .apply_move(&Move::horizontal(0, 1))
            .unwrap();
        assert_eq!(t.canonical_key(), u.canonical_key());

        assert_ne!(
            empty(Topology::Rectangle, 2, 3).canonical_key(),
            empty(Topology::Rectangle, 3, 2).canonical_key()
        );
    }

    #[test]
    fn rot90_examples() {
        let p = empty(Topology::Rectangle, 2, 3);
        assert_eq!(p.rot90().unwrap().spec(), BoardSpec::rect(3, 2));
        let q = empty(Topology::Rectangle, 2, 1)
            .apply_move(&Move::vertical(0, 0))
            .unwrap()
            .rot90()
            .unwrap();
        assert_eq!(q.spec(), BoardSpec::rect(1, 2));
        assert_eq!(q.empty_count(), 0);
        let s = empty(Topology::Rectangle, 3, 3)
            .apply_move(&Move::vertical(0, 1))
            .unwrap();
        let back = s.rot90().unwrap().rot90().unwrap().rot90().unwrap().rot90().unwrap();
        assert_eq!(back, s);
        assert!(empty(Topology::CylinderH, 2, 3).rot90().is_err());
    }

    #[test]
    fn concat_and_stack() {
        assert_eq!(
            BoardSpec::concat_h(BoardSpec::rect(2, 4), BoardSpec::rect(2, 9)).unwrap(),
            BoardSpec::rect(2, 13)
        );
        assert_eq!(
            BoardSpec::stack_v(BoardSpec::rect(4, 13), BoardSpec::rect(9, 13)).unwrap(),
            BoardSpec::rect(13, 13)
        );
        assert!(matches!(
            BoardSpec::concat_h(BoardSpec::rect(2, 4), BoardSpec::rect(3, 4)),
            Err(BoardError::DimensionMismatch { .. })
        ));
        let t = BoardSpec::with_topology(Topology::Torus, 2, 4);
        assert_eq!(
            BoardSpec::concat_h(t, BoardSpec::rect(2, 4)),
            Err(BoardError::TopologyMismatch)
        );
    }

    #[test]
    fn capacity_is_enforced() {
        assert!(Position::empty(BoardSpec::rect(11, 11)).is_ok());
        assert_eq!(
            Position::empty(BoardSpec::rect(12, 11)),
            Err(BoardError::CapacityExceeded { cells: 132 })
        );
    }

    #[test]
    fn notation_round_trip() {
        let m = Move::horizontal(1, 2);
        assert_eq!(m.to_string(), "H c2:d2");
        assert_eq!("H c2:d2".parse::<Move>().unwrap(), m);
        assert_eq!(Cell::new(0, 26).to_string(), "aa1");
        assert_eq!("aa1".parse::<Cell>().unwrap(), Cell::new(0, 26));
        assert_eq!("torus:4x4".parse::<BoardSpec>().unwrap().topology, Topology::Torus);
        assert_eq!("3x5".parse::<BoardSpec>().unwrap(), BoardSpec::rect(3, 5));
    }
}
