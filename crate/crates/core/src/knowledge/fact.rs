//! Facts, value bounds and their provenance, plus the line-delimited
//! record format used for knowledge-base files.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::board::{BoardSpec, Topology};
use crate::cgt::{parse_value, render_value, GameValue};
use crate::outcome::{OutcomeClass, OutcomeSet};

/// Facts are keyed by board family member.
pub type BoardKey = BoardSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Outcome of a same-width concatenation bounds the long board above.
    HConcat,
    /// Stacking same-length boards bounds the tall board below.
    VStack,
    /// A Vera move splitting a width-2 board into two non-negative parts.
    SplitWidth2,
    Square,
    Subtraction,
    Transpose,
    /// The topology order chain between rectangles, cylinders and tori.
    TopologyChain,
    /// Width-2 torus against the rectangle and the rectangle one shorter.
    TorusTable,
    /// Outcome read off an exact value or a value bound.
    ValueSign,
    /// Upper bound on a long board as a sum of upper bounds.
    BoundSum,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::HConcat => "h_concat",
            Rule::VStack => "v_stack",
            Rule::SplitWidth2 => "split_width2",
            Rule::Square => "square",
            Rule::Subtraction => "subtraction",
            Rule::Transpose => "transpose",
            Rule::TopologyChain => "topology_chain",
            Rule::TorusTable => "torus_table",
            Rule::ValueSign => "value_sign",
            Rule::BoundSum => "bound_sum",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Searched {
        nodes: u64,
    },
    Asserted {
        citation: String,
    },
    Derived {
        rule: Rule,
        #[serde(with = "key_list")]
        premises: Vec<BoardKey>,
    },
}

impl Provenance {
    pub fn kind(&self) -> &'static str {
        match self {
            Provenance::Searched { .. } => "searched",
            Provenance::Asserted { .. } => "asserted",
            Provenance::Derived { .. } => "derived",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fact {
    pub key: BoardKey,
    pub outcomes: OutcomeSet,
    pub provenance: Provenance,
}

impl Fact {
    pub fn is_unknown(&self) -> bool {
        self.outcomes == OutcomeSet::ALL
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSide {
    /// The game is at most the bound.
    Upper,
    /// The game is at least the bound.
    Lower,
    /// The game equals the bound.
    Exact,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueBound {
    pub key: BoardKey,
    pub bound: GameValue,
    pub side: BoundSide,
    pub provenance: Provenance,
}

impl ValueBound {
    pub fn is_upper(&self) -> bool {
        matches!(self.side, BoundSide::Upper | BoundSide::Exact)
    }

    pub fn is_lower(&self) -> bool {
        matches!(self.side, BoundSide::Lower | BoundSide::Exact)
    }
}

/// One line of a knowledge-base file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Record {
    Fact(Fact),
    Bound(ValueBound),
}

#[derive(Serialize, Deserialize)]
struct RawRecord {
    topology: Topology,
    width: u16,
    length: u16,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    outcomes: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    side: Option<BoundSide>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<String>,
    provenance: Provenance,
}

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("line {line}: {reason}")]
    Invalid { line: usize, reason: String },
}

impl Record {
    pub fn key(&self) -> BoardKey {
        match self {
            Record::Fact(f) => f.key,
            Record::Bound(b) => b.key,
        }
    }

    pub fn to_line(&self) -> String {
        let key = self.key();
        let mut raw = RawRecord {
            topology: key.topology,
            width: key.width,
            length: key.length,
            outcomes: None,
            side: None,
            value: None,
            provenance: Provenance::Searched { nodes: 0 },
        };
        match self {
            Record::Fact(f) => {
                raw.outcomes = Some(f.outcomes.codes());
                raw.provenance = f.provenance.clone();
            }
            Record::Bound(b) => {
                raw.side = Some(b.side);
                raw.value = Some(render_value(b.bound));
                raw.provenance = b.provenance.clone();
            }
        }
        serde_json::to_string(&raw).expect("records serialise")
    }

    pub fn parse_line(text: &str, line: usize) -> Result<Record, RecordError> {
        let bad = |reason: String| RecordError::Invalid { line, reason };
        let raw: RawRecord = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        let key = BoardSpec::new(raw.topology, raw.width, raw.length)
            .map_err(|e| bad(e.to_string()))?;
        match (raw.outcomes, raw.side, raw.value) {
            (Some(codes), None, None) => {
                let mut set = OutcomeSet::EMPTY;
                for code in codes {
                    let c: OutcomeClass = code.parse().map_err(bad)?;
                    set = set.union(c.into());
                }
                if set.is_empty() {
                    return Err(bad("empty outcome set".into()));
                }
                Ok(Record::Fact(Fact {
                    key,
                    outcomes: set,
                    provenance: raw.provenance,
                }))
            }
            (None, Some(side), Some(value)) => {
                let bound = parse_value(&value).map_err(|e| bad(e.to_string()))?;
                Ok(Record::Bound(ValueBound {
                    key,
                    bound,
                    side,
                    provenance: raw.provenance,
                }))
            }
            _ => Err(bad(
                "a record has either `outcomes` or both `side` and `value`".into(),
            )),
        }
    }
}

/// Parses a whole file; blank lines and `#` comments are skipped.
pub fn parse_records(text: &str) -> Result<Vec<Record>, RecordError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| Record::parse_line(l, i + 1))
        .collect()
}

mod key_list {
    use super::*;

    pub fn serialize<S: Serializer>(keys: &[BoardKey], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(keys.iter().map(|k| k.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BoardKey>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .map(|t| t.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fact_line_round_trip() {
        let f = Record::Fact(Fact {
            key: BoardSpec::rect(2, 26),
            outcomes: OutcomeSet::single(OutcomeClass::H),
            provenance: Provenance::Derived {
                rule: Rule::HConcat,
                premises: vec![BoardSpec::rect(2, 13), BoardSpec::rect(2, 13)],
            },
        });
        let line = f.to_line();
        assert!(line.contains("\"premises\":[\"rect:2x13\",\"rect:2x13\"]"), "{line}");
        assert_eq!(Record::parse_line(&line, 1).unwrap(), f);
    }

    #[test]
    fn bound_line_round_trip() {
        let b = Record::Bound(ValueBound {
            key: BoardSpec::rect(9, 2),
            bound: parse_value("3/2|0||-1/2|-5/2").unwrap(),
            side: BoundSide::Exact,
            provenance: Provenance::Asserted {
                citation: "exact value".into(),
            },
        });
        assert_eq!(Record::parse_line(&b.to_line(), 1).unwrap(), b);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(Record::parse_line("{}", 3).is_err());
        let empty = r#"{"topology":"rect","width":2,"length":3,"outcomes":[],"provenance":{"kind":"searched","nodes":1}}"#;
        assert!(Record::parse_line(empty, 1).is_err());
        let zero = r#"{"topology":"rect","width":0,"length":3,"outcomes":["V"],"provenance":{"kind":"searched","nodes":1}}"#;
        assert!(Record::parse_line(zero, 1).is_err());
    }
}
