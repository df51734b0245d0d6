//! Proof trees for knowledge-base entries, and their independent replay.

use std::collections::HashSet;

use serde::Serialize;

use super::fact::{BoardKey, BoundSide, Provenance, Rule};
use super::kb::KnowledgeBase;
use super::rules::conclude;
use crate::board::{BoardSpec, Topology};
use crate::cgt::parse_value;
use crate::outcome::OutcomeSet;

/// What was known about `key` at some point, and the steps that got it
/// there. A node that already appeared earlier in the tree is marked
/// `repeated` and carries no steps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceNode {
    pub key: BoardKey,
    pub outcomes: OutcomeSet,
    pub repeated: bool,
    pub steps: Vec<TraceStep>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub seq: usize,
    pub provenance: Provenance,
    pub contributed: OutcomeSet,
    pub result: OutcomeSet,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub premises: Vec<TraceNode>,
    /// The value bound a `value_sign` step read.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundNode>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundNode {
    pub key: BoardKey,
    pub side: BoundSide,
    pub value: String,
    pub provenance: Provenance,
    pub repeated: bool,
    pub from: Vec<BoundNode>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("nothing is known about {0}")]
pub struct UnknownKey(pub BoardKey);

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("replay fails at {key} step {seq}: {reason}")]
pub struct ReplayError {
    pub key: BoardKey,
    pub seq: usize,
    pub reason: String,
}

fn side_name(side: BoundSide) -> &'static str {
    match side {
        BoundSide::Upper => "upper",
        BoundSide::Lower => "lower",
        BoundSide::Exact => "exact",
    }
}

struct Builder<'a> {
    kb: &'a KnowledgeBase,
    seen: HashSet<(BoardKey, usize)>,
    seen_bounds: HashSet<(BoardKey, usize)>,
}

impl Builder<'_> {
    /// `key` as it stood before step `before`.
    fn node(&mut self, key: BoardKey, before: usize) -> TraceNode {
        let steps: Vec<_> = self
            .kb
            .steps_for(&key)
            .into_iter()
            .filter(|s| s.seq < before)
            .collect();
        let outcomes = steps.last().map_or(OutcomeSet::ALL, |s| s.result);
        if !self.seen.insert((key, steps.len())) {
            return TraceNode {
                key,
                outcomes,
                repeated: true,
                steps: Vec::new(),
            };
        }
        let steps = steps
            .into_iter()
            .map(|s| {
                let premises = s.premises().iter().map(|p| self.node(*p, s.seq)).collect();
                let bound = (s.rule() == Some(Rule::ValueSign))
                    .then(|| self.bound_for(key, s.detail.as_deref()))
                    .flatten();
                TraceStep {
                    seq: s.seq,
                    provenance: s.provenance.clone(),
                    contributed: s.contributed,
                    result: s.result,
                    detail: s.detail.clone(),
                    premises,
                    bound,
                }
            })
            .collect();
        TraceNode {
            key,
            outcomes,
            repeated: false,
            steps,
        }
    }

    fn bound_for(&mut self, key: BoardKey, detail: Option<&str>) -> Option<BoundNode> {
        let (side, value) = detail?.split_once(' ')?;
        let index = self.kb.bounds_for(&key).iter().position(|e| {
            side_name(e.bound.side) == side && e.bound.bound.to_string() == value
        })?;
        Some(self.bound(key, index))
    }

    fn bound(&mut self, key: BoardKey, index: usize) -> BoundNode {
        let e = &self.kb.bounds_for(&key)[index];
        let repeated = !self.seen_bounds.insert((key, index));
        let from = if repeated {
            Vec::new()
        } else {
            e.from.clone().into_iter().map(|(k, i)| self.bound(k, i)).collect()
        };
        BoundNode {
            key,
            side: e.bound.side,
            value: e.bound.bound.to_string(),
            provenance: e.bound.provenance.clone(),
            repeated,
            from,
        }
    }
}

/// The tree of rule applications behind what is known about `key`.
pub fn explain(kb: &KnowledgeBase, key: &BoardKey) -> Result<TraceNode, UnknownKey> {
    if !kb.is_known(key) {
        return Err(UnknownKey(*key));
    }
    let mut b = Builder {
        kb,
        seen: HashSet::new(),
        seen_bounds: HashSet::new(),
    };
    Ok(b.node(*key, usize::MAX))
}

#[derive(Default)]
struct Replayer {
    done: HashSet<(BoardKey, OutcomeSet)>,
}

impl Replayer {
    fn node(&mut self, n: &TraceNode) -> Result<OutcomeSet, ReplayError> {
        let fail = |seq, reason: String| ReplayError {
            key: n.key,
            seq,
            reason,
        };
        if n.repeated {
            if n.outcomes != OutcomeSet::ALL && !self.done.contains(&(n.key, n.outcomes)) {
                return Err(fail(0, "refers to a state not shown earlier".into()));
            }
            return Ok(n.outcomes);
        }
        let mut acc = OutcomeSet::ALL;
        for s in &n.steps {
            let sets = s
                .premises
                .iter()
                .map(|p| self.node(p))
                .collect::<Result<Vec<_>, _>>()?;
            let got = match &s.provenance {
                Provenance::Derived { rule, premises } => {
                    let keys: Vec<BoardKey> = s.premises.iter().map(|p| p.key).collect();
                    if &keys != premises {
                        return Err(fail(s.seq, "premise nodes do not match the step".into()));
                    }
                    if *rule == Rule::ValueSign {
                        check_bound_use(s).map_err(|r| fail(s.seq, r))?;
                    }
                    conclude(*rule, &n.key, premises, &sets, s.detail.as_deref())
                }
                _ => s.contributed,
            };
            if got != s.contributed {
                return Err(fail(
                    s.seq,
                    format!("rule gives {got}, trace says {}", s.contributed),
                ));
            }
            acc = acc.intersect(got);
            if acc != s.result {
                return Err(fail(s.seq, format!("result {acc}, trace says {}", s.result)));
            }
        }
        if acc != n.outcomes {
            return Err(fail(0, format!("node ends at {acc}, claims {}", n.outcomes)));
        }
        self.done.insert((n.key, acc));
        Ok(acc)
    }
}

fn check_bound_use(s: &TraceStep) -> Result<(), String> {
    let b = s.bound.as_ref().ok_or("value step without its bound")?;
    if s.detail.as_deref() != Some(&format!("{} {}", side_name(b.side), b.value)) {
        return Err("bound does not match the step".into());
    }
    check_bound(b)
}

/// A derived upper bound must lie above the sum of the bounds it came from.
fn check_bound(b: &BoundNode) -> Result<(), String> {
    match &b.provenance {
        Provenance::Derived { .. } if b.repeated => Ok(()),
        Provenance::Derived { rule, premises } => {
            if *rule != Rule::BoundSum || b.from.len() != 2 || premises.len() != 2 {
                return Err(format!("bound on {} is not a two-part sum", b.key));
            }
            if b.from[0].key.length + b.from[1].key.length != b.key.length {
                return Err(format!("parts of {} do not add up", b.key));
            }
            let parse = |t: &str| parse_value(t).map_err(|e| e.to_string());
            let sum = parse(&b.from[0].value)?.add(parse(&b.from[1].value)?);
            if b.side != BoundSide::Upper || !sum.leq(parse(&b.value)?) {
                return Err(format!("bound on {} is below the sum of its parts", b.key));
            }
            b.from.iter().try_for_each(check_bound)
        }
        _ => Ok(()),
    }
}

/// Re-executes every step of `tree` through the rules and returns the
/// outcome set it arrives at.
pub fn replay(tree: &TraceNode) -> Result<OutcomeSet, ReplayError> {
    Replayer::default().node(tree)
}

/// A one-step derivation of `key` from the current knowledge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Alternative {
    pub rule: Rule,
    pub premises: Vec<BoardKey>,
    pub concluded: OutcomeSet,
}

/// Every split of `key` into two boards along its length (or width) whose
/// current knowledge says something on its own.
pub fn alternatives(kb: &KnowledgeBase, key: &BoardKey) -> Vec<Alternative> {
    let mut out = Vec::new();
    let t = key.topology;
    let mut try_pair = |rule: Rule, a: BoardKey, b: BoardKey| {
        let sets = [kb.get(&a), kb.get(&b)];
        let concluded = conclude(rule, key, &[a, b], &sets, None);
        if concluded != OutcomeSet::ALL {
            out.push(Alternative {
                rule,
                premises: vec![a, b],
                concluded,
            });
        }
    };
    if matches!(t, Topology::Rectangle | Topology::CylinderV) {
        for a in 1..=key.length / 2 {
            let pa = BoardSpec::with_topology(t, key.width, a);
            let pb = BoardSpec::with_topology(t, key.width, key.length - a);
            try_pair(Rule::HConcat, pa, pb);
        }
    }
    if matches!(t, Topology::Rectangle | Topology::CylinderH) {
        for a in 1..=key.width / 2 {
            let pa = BoardSpec::with_topology(t, a, key.length);
            let pb = BoardSpec::with_topology(t, key.width - a, key.length);
            try_pair(Rule::VStack, pa, pb);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::fact::Fact;
    use crate::knowledge::rules::{saturate, Horizon, RuleSet};
    use crate::outcome::OutcomeClass::*;

    fn kb() -> KnowledgeBase {
        let mut kb = KnowledgeBase::new();
        for (n, c) in [(1, V), (2, First), (3, First), (4, H), (5, V), (13, Second)] {
            kb.add_fact(Fact {
                key: BoardSpec::rect(2, n),
                outcomes: c.into(),
                provenance: Provenance::Asserted {
                    citation: "test".into(),
                },
            })
            .unwrap();
        }
        let h = Horizon {
            max_width: 4,
            max_length: 30,
        };
        saturate(&mut kb, h, RuleSet::default()).unwrap();
        kb
    }

    #[test]
    fn seeds_are_leaves() {
        let kb = kb();
        let t = explain(&kb, &BoardSpec::rect(2, 4)).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert!(t.steps[0].premises.is_empty());
        assert_eq!(t.steps[0].provenance.kind(), "asserted");
    }

    #[test]
    fn trees_replay() {
        let kb = kb();
        for n in 1..=30 {
            let key = BoardSpec::rect(2, n);
            if let Ok(t) = explain(&kb, &key) {
                assert_eq!(replay(&t).unwrap(), kb.get(&key), "{key}");
            }
        }
    }

    #[test]
    fn tampered_tree_fails() {
        let kb = kb();
        let mut t = explain(&kb, &BoardSpec::rect(2, 8)).unwrap();
        let step = t.steps.iter_mut().find(|s| !s.premises.is_empty()).unwrap();
        step.premises[0].outcomes = OutcomeSet::single(V);
        step.premises[0].steps.clear();
        assert!(replay(&t).is_err());
    }

    #[test]
    fn unknown_key() {
        assert!(explain(&kb(), &BoardSpec::rect(20, 20)).is_err());
    }

    #[test]
    fn alternatives_list_splits() {
        let kb = kb();
        let alts = alternatives(&kb, &BoardSpec::rect(2, 26));
        assert!(alts.iter().any(|a| a.premises[0] == BoardSpec::rect(2, 13)
            && a.concluded == OutcomeSet::of(&[Second, H])));
    }
}
