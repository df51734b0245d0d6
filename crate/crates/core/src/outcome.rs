//! Outcome classes and sets of them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::board::Player;

/// Who wins under perfect play.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OutcomeClass {
    /// Vera wins whoever starts (G > 0).
    V,
    /// Hepzibah wins whoever starts (G < 0).
    H,
    /// The player to move wins (G is fuzzy).
    First,
    /// The player to move loses (G = 0).
    Second,
}

impl OutcomeClass {
    pub const ALL: [OutcomeClass; 4] = [
        OutcomeClass::V,
        OutcomeClass::H,
        OutcomeClass::First,
        OutcomeClass::Second,
    ];

    /// Classifies from the two "wins moving first" answers.
    pub fn from_first_moves(vertical_wins_first: bool, horizontal_wins_first: bool) -> Self {
        match (vertical_wins_first, horizontal_wins_first) {
            (true, true) => OutcomeClass::First,
            (true, false) => OutcomeClass::V,
            (false, true) => OutcomeClass::H,
            (false, false) => OutcomeClass::Second,
        }
    }

    /// Outcome of the negated game (board turned a quarter).
    pub fn negated(self) -> Self {
        match self {
            OutcomeClass::V => OutcomeClass::H,
            OutcomeClass::H => OutcomeClass::V,
            other => other,
        }
    }

    pub fn wins_moving_first(self, player: Player) -> bool {
        match player {
            Player::Vertical => matches!(self, OutcomeClass::V | OutcomeClass::First),
            Player::Horizontal => matches!(self, OutcomeClass::H | OutcomeClass::First),
        }
    }

    pub fn wins_moving_second(self, player: Player) -> bool {
        match player {
            Player::Vertical => matches!(self, OutcomeClass::V | OutcomeClass::Second),
            Player::Horizontal => matches!(self, OutcomeClass::H | OutcomeClass::Second),
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            OutcomeClass::V => "V",
            OutcomeClass::H => "H",
            OutcomeClass::First => "1",
            OutcomeClass::Second => "2",
        }
    }

    fn bit(self) -> u8 {
        match self {
            OutcomeClass::V => 1,
            OutcomeClass::H => 2,
            OutcomeClass::First => 4,
            OutcomeClass::Second => 8,
        }
    }
}

impl fmt::Display for OutcomeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutcomeClass::V => "V",
            OutcomeClass::H => "H",
            OutcomeClass::First => "1st",
            OutcomeClass::Second => "2nd",
        })
    }
}

impl FromStr for OutcomeClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "v" => Ok(OutcomeClass::V),
            "h" => Ok(OutcomeClass::H),
            "1" | "1st" | "first" => Ok(OutcomeClass::First),
            "2" | "2nd" | "second" => Ok(OutcomeClass::Second),
            other => Err(format!("unknown outcome `{other}`")),
        }
    }
}

/// Partial knowledge: the outcome is one of the members. An empty set is a
/// contradiction and never escapes the rule engine.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutcomeSet(u8);

impl OutcomeSet {
    pub const EMPTY: OutcomeSet = OutcomeSet(0);
    pub const ALL: OutcomeSet = OutcomeSet(0b1111);

    pub fn of(members: &[OutcomeClass]) -> Self {
        OutcomeSet(members.iter().fold(0, |acc, c| acc | c.bit()))
    }

    pub fn single(c: OutcomeClass) -> Self {
        OutcomeSet(c.bit())
    }

    pub fn contains(self, c: OutcomeClass) -> bool {
        self.0 & c.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_subset(self, other: OutcomeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersect(self, other: OutcomeSet) -> Self {
        OutcomeSet(self.0 & other.0)
    }

    pub fn union(self, other: OutcomeSet) -> Self {
        OutcomeSet(self.0 | other.0)
    }

    pub fn without(self, c: OutcomeClass) -> Self {
        OutcomeSet(self.0 & !c.bit())
    }

    pub fn single_member(self) -> Option<OutcomeClass> {
        if self.len() == 1 {
            self.iter().next()
        } else {
            None
        }
    }

    pub fn iter(self) -> impl Iterator<Item = OutcomeClass> {
        OutcomeClass::ALL.into_iter().filter(move |c| self.contains(*c))
    }

    /// Swaps V and H, as for the quarter-turned board.
    pub fn negated(self) -> Self {
        self.iter().map(OutcomeClass::negated).fold(OutcomeSet::EMPTY, |s, c| {
            s.union(OutcomeSet::single(c))
        })
    }

    /// Members where `player` wins when moving first.
    pub fn first_mover_wins(player: Player) -> Self {
        match player {
            Player::Vertical => OutcomeSet::of(&[OutcomeClass::V, OutcomeClass::First]),
            Player::Horizontal => OutcomeSet::of(&[OutcomeClass::H, OutcomeClass::First]),
        }
    }

    /// Members where `player` wins when moving second.
    pub fn second_mover_wins(player: Player) -> Self {
        match player {
            Player::Vertical => OutcomeSet::of(&[OutcomeClass::V, OutcomeClass::Second]),
            Player::Horizontal => OutcomeSet::of(&[OutcomeClass::H, OutcomeClass::Second]),
        }
    }

    /// Codes as used in knowledge-base files: `V`, `H`, `1`, `2`.
    pub fn codes(self) -> Vec<String> {
        self.iter().map(|c| c.code().to_string()).collect()
    }

    /// Compact atlas label: `1`, `2`, `H`, `V` for singletons, `1h`, `2v`
    /// and so on for pairs, `-v` style for "anything but", `?` when
    /// nothing is known.
    pub fn label(self) -> String {
        use OutcomeClass::*;
        let lower = |c: OutcomeClass| c.code().to_ascii_lowercase();
        match self.len() {
            0 => "!".into(),
            1 => self.single_member().map(|c| c.code().to_string()).unwrap_or_default(),
            2 => {
                // numbers first, then the player letter
                let mut members: Vec<OutcomeClass> = self.iter().collect();
                members.sort_by_key(|c| match c {
                    First => 0,
                    Second => 1,
                    H => 2,
                    V => 3,
                });
                format!("{}{}", members[0].code(), lower(members[1]))
            }
            3 => {
                let missing = OutcomeSet::ALL
                    .iter()
                    .find(|c| !self.contains(*c))
                    .expect("three members");
                format!("-{}", lower(missing))
            }
            _ => "?".into(),
        }
    }

    pub fn parse_label(label: &str) -> Option<OutcomeSet> {
        let l = label.trim().to_ascii_lowercase();
        if l == "?" {
            return Some(OutcomeSet::ALL);
        }
        if let Some(rest) = l.strip_prefix('-') {
            let c: OutcomeClass = rest.parse().ok()?;
            return Some(OutcomeSet::ALL.without(c));
        }
        let mut set = OutcomeSet::EMPTY;
        for ch in l.chars() {
            let c: OutcomeClass = ch.to_string().parse().ok()?;
            set = set.union(OutcomeSet::single(c));
        }
        (!set.is_empty()).then_some(set)
    }
}

impl fmt::Debug for OutcomeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for OutcomeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Serialized as its member codes, e.g. `["1","H"]`.
impl Serialize for OutcomeSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter().map(OutcomeClass::code))
    }
}

impl<'de> Deserialize<'de> for OutcomeSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let codes = Vec::<String>::deserialize(d)?;
        let mut set = OutcomeSet::EMPTY;
        for c in codes {
            let c: OutcomeClass = c.parse().map_err(serde::de::Error::custom)?;
            set = set.union(c.into());
        }
        Ok(set)
    }
}

impl From<OutcomeClass> for OutcomeSet {
    fn from(c: OutcomeClass) -> Self {
        OutcomeSet::single(c)
    }
}
