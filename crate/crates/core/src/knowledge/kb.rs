//! The knowledge base: current outcome sets, value bounds, and the log of
//! every refinement that produced them.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use super::fact::{BoardKey, Fact, Provenance, Record, Rule, ValueBound};
use crate::cgt::GameValue;
use crate::outcome::OutcomeSet;

/// One refinement of one key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub seq: usize,
    pub key: BoardKey,
    pub provenance: Provenance,
    /// Outcome sets of the premises when the rule fired, in premise order.
    pub premise_sets: Vec<OutcomeSet>,
    /// Value bound a `ValueSign` step read, as `side value`.
    pub detail: Option<String>,
    pub contributed: OutcomeSet,
    pub result: OutcomeSet,
}

impl Step {
    pub fn rule(&self) -> Option<Rule> {
        match &self.provenance {
            Provenance::Derived { rule, .. } => Some(*rule),
            _ => None,
        }
    }

    pub fn premises(&self) -> &[BoardKey] {
        match &self.provenance {
            Provenance::Derived { premises, .. } => premises,
            _ => &[],
        }
    }
}

/// A value bound together with the bounds it was computed from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundEntry {
    pub bound: ValueBound,
    pub seq: usize,
    pub from: Vec<(BoardKey, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct Contradiction {
    pub key: BoardKey,
    pub held: OutcomeSet,
    pub incoming: OutcomeSet,
    pub incoming_provenance: Provenance,
    /// Steps that produced `held`.
    pub held_by: Vec<Step>,
}

impl fmt::Display for Contradiction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "contradiction at {}: known {} but {} claims {}",
            self.key,
            self.held,
            describe(&self.incoming_provenance),
            self.incoming
        )?;
        for s in &self.held_by {
            write!(f, "; #{} {} gave {}", s.seq, describe(&s.provenance), s.contributed)?;
        }
        Ok(())
    }
}

pub fn describe(p: &Provenance) -> String {
    match p {
        Provenance::Searched { nodes } => format!("search ({nodes} nodes)"),
        Provenance::Asserted { citation } => format!("assertion [{citation}]"),
        Provenance::Derived { rule, premises } => {
            let ps: Vec<String> = premises.iter().map(|k| k.to_string()).collect();
            format!("{rule}({})", ps.join(", "))
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct KnowledgeBase {
    facts: BTreeMap<BoardKey, OutcomeSet>,
    steps_by_key: HashMap<BoardKey, Vec<usize>>,
    bounds: BTreeMap<BoardKey, Vec<BoundEntry>>,
    trace: Vec<Step>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        KnowledgeBase::default()
    }

    pub fn from_records(records: impl IntoIterator<Item = Record>) -> Result<Self, Contradiction> {
        let mut kb = KnowledgeBase::new();
        for r in records {
            kb.add_record(r)?;
        }
        Ok(kb)
    }

    pub fn add_record(&mut self, record: Record) -> Result<(), Contradiction> {
        match record {
            Record::Fact(f) => self.add_fact(f).map(|_| ()),
            Record::Bound(b) => {
                self.add_bound(b, Vec::new());
                Ok(())
            }
        }
    }

    /// What is known about `key`; everything if nothing is.
    pub fn get(&self, key: &BoardKey) -> OutcomeSet {
        self.facts.get(key).copied().unwrap_or(OutcomeSet::ALL)
    }

    pub fn is_known(&self, key: &BoardKey) -> bool {
        self.facts.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &BoardKey> {
        self.facts.keys()
    }

    pub fn facts(&self) -> impl Iterator<Item = (&BoardKey, &OutcomeSet)> {
        self.facts.iter()
    }

    pub fn trace(&self) -> &[Step] {
        &self.trace
    }

    pub fn steps_for(&self, key: &BoardKey) -> Vec<&Step> {
        self.steps_by_key
            .get(key)
            .map(|ix| ix.iter().map(|&i| &self.trace[i]).collect())
            .unwrap_or_default()
    }

    pub fn bounds_for(&self, key: &BoardKey) -> &[BoundEntry] {
        self.bounds.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn bound_keys(&self) -> impl Iterator<Item = &BoardKey> {
        self.bounds.keys()
    }

    /// Provenance class summarising how `key` came to be known.
    pub fn provenance_summary(&self, key: &BoardKey) -> Option<&'static str> {
        let steps = self.steps_for(key);
        if steps.is_empty() {
            return None;
        }
        for kind in ["searched", "asserted"] {
            if steps.iter().any(|s| s.provenance.kind() == kind) {
                return Some(kind);
            }
        }
        Some("derived")
    }

    pub fn add_fact(&mut self, fact: Fact) -> Result<bool, Contradiction> {
        self.refine(fact.key, fact.outcomes, fact.provenance, Vec::new(), None)
    }

    /// Intersects the knowledge of `key` with `set`. Returns whether
    /// anything changed; an empty intersection is a contradiction and
    /// leaves the base untouched.
    pub fn refine(
        &mut self,
        key: BoardKey,
        set: OutcomeSet,
        provenance: Provenance,
        premise_sets: Vec<OutcomeSet>,
        detail: Option<String>,
    ) -> Result<bool, Contradiction> {
        let held = self.get(&key);
        let result = held.intersect(set);
        if result.is_empty() {
            return Err(Contradiction {
                key,
                held,
                incoming: set,
                incoming_provenance: provenance,
                held_by: self.steps_for(&key).into_iter().cloned().collect(),
            });
        }
        if result == held {
            return Ok(false);
        }
        let seq = self.trace.len();
        self.trace.push(Step {
            seq,
            key,
            provenance,
            premise_sets,
            detail,
            contributed: set,
            result,
        });
        self.steps_by_key.entry(key).or_default().push(seq);
        self.facts.insert(key, result);
        Ok(true)
    }

    /// Adds a bound unless an identical one is already held. Returns its
    /// index among the key's bounds.
    pub fn add_bound(&mut self, bound: ValueBound, from: Vec<(BoardKey, usize)>) -> usize {
        let seq = self.trace.len() + self.bounds.values().map(Vec::len).sum::<usize>();
        let list = self.bounds.entry(bound.key).or_default();
        if let Some(i) = list
            .iter()
            .position(|e| e.bound.bound == bound.bound && e.bound.side == bound.side)
        {
            return i;
        }
        list.push(BoundEntry { bound, seq, from });
        list.len() - 1
    }

    pub fn upper_bounds(&self, key: &BoardKey) -> Vec<GameValue> {
        self.bounds_for(key)
            .iter()
            .filter(|e| e.bound.is_upper())
            .map(|e| e.bound.bound)
            .collect()
    }

    /// Every fact and bound as records: one line per key with its current
    /// set and the provenance of its latest refinement.
    pub fn to_records(&self) -> Vec<Record> {
        let mut out = Vec::new();
        for (key, list) in &self.bounds {
            for e in list {
                out.push(Record::Bound(ValueBound {
                    key: *key,
                    ..e.bound.clone()
                }));
            }
        }
        for (key, set) in &self.facts {
            let last = self.steps_by_key[key].last().copied().expect("known keys have steps");
            out.push(Record::Fact(Fact {
                key: *key,
                outcomes: *set,
                provenance: self.trace[last].provenance.clone(),
            }));
        }
        out
    }

    /// Numbers of solved keys and of keys with partial knowledge.
    pub fn count_by_status(&self) -> (usize, usize) {
        let solved = self.facts.values().filter(|s| s.len() == 1).count();
        (solved, self.facts.len() - solved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::BoardSpec;
    use crate::outcome::OutcomeClass::*;

    fn asserted() -> Provenance {
        Provenance::Asserted {
            citation: "test".into(),
        }
    }

    #[test]
    fn refine_only_shrinks() {
        let mut kb = KnowledgeBase::new();
        let k = BoardSpec::rect(2, 7);
        assert!(kb
            .refine(k, OutcomeSet::of(&[First, V]), asserted(), vec![], None)
            .unwrap());
        assert!(!kb
            .refine(k, OutcomeSet::of(&[First, V, H]), asserted(), vec![], None)
            .unwrap());
        assert!(kb
            .refine(k, OutcomeSet::of(&[First, H]), asserted(), vec![], None)
            .unwrap());
        assert_eq!(kb.get(&k), OutcomeSet::single(First));
        assert_eq!(kb.trace().len(), 2);
    }

    #[test]
    fn contradiction_names_the_key() {
        let mut kb = KnowledgeBase::new();
        let k = BoardSpec::rect(2, 4);
        kb.refine(k, OutcomeSet::single(H), asserted(), vec![], None)
            .unwrap();
        let err = kb
            .refine(k, OutcomeSet::single(V), asserted(), vec![], None)
            .unwrap_err();
        assert_eq!(err.key, k);
        assert_eq!(err.held_by.len(), 1);
        assert!(err.to_string().contains("rect:2x4"));
        assert_eq!(kb.get(&k), OutcomeSet::single(H));
    }
}
