//! Sound refinement rules and the fixpoint driver.

use super::algebra::{outcome_from_lower_bound, outcome_from_upper_bound, outcome_of_sum};
use super::bounds;
use super::fact::{BoardKey, BoundSide, Provenance, Rule};
use super::kb::{Contradiction, KnowledgeBase};
use crate::board::{BoardSpec, Topology};
use crate::cgt::parse_value;
use crate::outcome::{OutcomeClass, OutcomeSet};
use OutcomeClass::*;

/// Keys the rules range over: every topology, any orientation with the
/// short side at most `max_width` and the long side at most `max_length`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Horizon {
    pub max_width: u16,
    pub max_length: u16,
}

impl Default for Horizon {
    fn default() -> Self {
        Horizon {
            max_width: 13,
            max_length: 64,
        }
    }
}

impl Horizon {
    pub fn contains(&self, k: &BoardKey) -> bool {
        k.width >= 1
            && k.length >= 1
            && k.width.min(k.length) <= self.max_width
            && k.width.max(k.length) <= self.max_length
    }

    /// All keys of one topology inside the horizon.
    pub fn keys(&self, topology: Topology) -> impl Iterator<Item = BoardKey> + '_ {
        let n = self.max_length;
        (1..=n).flat_map(move |w| {
            (1..=n)
                .map(move |l| BoardSpec::with_topology(topology, w, l))
                .filter(|k| self.contains(k))
        })
    }
}

/// Which rules take part in saturation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RuleSet {
    pub transpose: bool,
    pub h_concat: bool,
    pub v_stack: bool,
    pub split_width2: bool,
    pub square: bool,
    pub subtraction: bool,
    pub topology_chain: bool,
    pub torus_table: bool,
    pub values: bool,
}

impl Default for RuleSet {
    fn default() -> Self {
        RuleSet {
            transpose: true,
            h_concat: true,
            v_stack: true,
            split_width2: true,
            square: true,
            subtraction: true,
            topology_chain: true,
            torus_table: true,
            values: true,
        }
    }
}

fn nonneg() -> OutcomeSet {
    OutcomeSet::of(&[Second, V])
}

fn nonpos() -> OutcomeSet {
    OutcomeSet::of(&[Second, H])
}

/// Position in the order `C_h <= rectangle, torus <= C_v` of boards of
/// the same size.
fn chain_rank(t: Topology) -> u8 {
    match t {
        Topology::CylinderH => 0,
        Topology::Rectangle | Topology::Torus => 1,
        Topology::CylinderV => 2,
    }
}

fn torus_row(rect_n: OutcomeClass, rect_prev: OutcomeClass) -> OutcomeSet {
    match (rect_n, rect_prev) {
        (H, _) => OutcomeSet::single(H),
        (First, First | H) => OutcomeSet::single(H),
        (First, Second | V) => OutcomeSet::single(First),
        (Second | V, First | H) => nonpos(),
        _ => OutcomeSet::ALL,
    }
}

/// What `rule` concludes about `key` from the premises' outcome sets.
/// Saturation and trace replay both go through here.
pub fn conclude(
    rule: Rule,
    key: &BoardKey,
    premises: &[BoardKey],
    sets: &[OutcomeSet],
    detail: Option<&str>,
) -> OutcomeSet {
    match rule {
        Rule::HConcat => outcome_from_upper_bound(outcome_of_sum(sets[0], sets[1])),
        Rule::VStack => outcome_from_lower_bound(outcome_of_sum(sets[0], sets[1])),
        Rule::SplitWidth2 => {
            // one premise means the other part is the empty board
            if sets.iter().all(|s| s.is_subset(nonneg())) {
                OutcomeSet::of(&[First, V])
            } else {
                OutcomeSet::ALL
            }
        }
        Rule::Square => {
            let both = OutcomeSet::of(&[First, Second]);
            if premises.is_empty() {
                return both;
            }
            let k = key.length.max(key.width) / key.length.min(key.width);
            let mut out = OutcomeSet::EMPTY;
            for c in sets[0].intersect(both).iter() {
                out = out.union(match (c, k % 2 == 0) {
                    (First, false) => OutcomeSet::of(&[First, H]),
                    _ => nonpos(),
                });
            }
            if key.width > key.length {
                out = out.negated();
            }
            if out.is_empty() {
                OutcomeSet::ALL
            } else {
                out
            }
        }
        Rule::Subtraction => {
            let p = premises[0];
            if p.width < p.length && sets[0].is_subset(nonneg()) {
                OutcomeSet::ALL.without(V)
            } else if p.width > p.length && sets[0].is_subset(nonpos()) {
                OutcomeSet::ALL.without(H)
            } else {
                OutcomeSet::ALL
            }
        }
        Rule::Transpose => sets[0].negated(),
        Rule::TopologyChain => {
            let (mine, theirs) = (chain_rank(key.topology), chain_rank(premises[0].topology));
            if mine < theirs {
                outcome_from_upper_bound(sets[0])
            } else {
                outcome_from_lower_bound(sets[0])
            }
        }
        Rule::TorusTable => {
            let mut out = OutcomeSet::EMPTY;
            for a in sets[0].iter() {
                for b in sets[1].iter() {
                    out = out.union(torus_row(a, b));
                }
            }
            out
        }
        Rule::ValueSign => {
            let Some((side, text)) = detail.and_then(|d| d.split_once(' ')) else {
                return OutcomeSet::ALL;
            };
            let Ok(g) = parse_value(text) else {
                return OutcomeSet::ALL;
            };
            let c = OutcomeSet::single(g.outcome());
            match side {
                "exact" => c,
                "upper" => outcome_from_upper_bound(c),
                "lower" => outcome_from_lower_bound(c),
                _ => OutcomeSet::ALL,
            }
        }
        Rule::BoundSum => OutcomeSet::ALL,
    }
}

struct Driver<'a> {
    kb: &'a mut KnowledgeBase,
    horizon: Horizon,
    changed: usize,
}

impl Driver<'_> {
    fn fire(
        &mut self,
        rule: Rule,
        key: BoardKey,
        premises: Vec<BoardKey>,
        detail: Option<String>,
    ) -> Result<(), Contradiction> {
        if !self.horizon.contains(&key) {
            return Ok(());
        }
        let sets: Vec<OutcomeSet> = premises.iter().map(|p| self.kb.get(p)).collect();
        let set = conclude(rule, &key, &premises, &sets, detail.as_deref());
        if set == OutcomeSet::ALL || self.kb.get(&key).is_subset(set) {
            return Ok(());
        }
        let provenance = Provenance::Derived { rule, premises };
        if self.kb.refine(key, set, provenance, sets, detail)? {
            self.changed += 1;
        }
        Ok(())
    }

    fn known(&self, key: &BoardKey) -> bool {
        self.kb.is_known(key)
    }

    fn transpose(&mut self) -> Result<(), Contradiction> {
        let keys: Vec<BoardKey> = self.kb.keys().copied().collect();
        for k in keys {
            self.fire(Rule::Transpose, k.transposed(), vec![k], None)?;
        }
        Ok(())
    }

    fn h_concat(&mut self) -> Result<(), Contradiction> {
        for topology in [Topology::Rectangle, Topology::CylinderV] {
            for key in self.horizon.keys(topology).collect::<Vec<_>>() {
                for a in 1..=key.length / 2 {
                    let pa = BoardSpec::with_topology(topology, key.width, a);
                    let pb = BoardSpec::with_topology(topology, key.width, key.length - a);
                    if self.known(&pa) && self.known(&pb) {
                        self.fire(Rule::HConcat, key, vec![pa, pb], None)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn v_stack(&mut self) -> Result<(), Contradiction> {
        for topology in [Topology::Rectangle, Topology::CylinderH] {
            for key in self.horizon.keys(topology).collect::<Vec<_>>() {
                for a in 1..=key.width / 2 {
                    let pa = BoardSpec::with_topology(topology, a, key.length);
                    let pb = BoardSpec::with_topology(topology, key.width - a, key.length);
                    if self.known(&pa) && self.known(&pb) {
                        self.fire(Rule::VStack, key, vec![pa, pb], None)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn split_width2(&mut self) -> Result<(), Contradiction> {
        let row = |n: u16| BoardSpec::rect(2, n);
        for n in 2..=self.horizon.max_length {
            // Vera's domino leaves lengths m and n - 1 - m
            for m in 0..=(n - 1) / 2 {
                let rest = n - 1 - m;
                let premises = if m == 0 {
                    vec![row(rest)]
                } else {
                    vec![row(m), row(rest)]
                };
                if premises.iter().all(|p| self.kb.get(p).is_subset(nonneg())) {
                    self.fire(Rule::SplitWidth2, row(n), premises, None)?;
                }
            }
        }
        Ok(())
    }

    fn square(&mut self) -> Result<(), Contradiction> {
        for n in 1..=self.horizon.max_width {
            let sq = BoardSpec::rect(n, n);
            self.fire(Rule::Square, sq, vec![], None)?;
            let mut k = 2u16;
            while n * k <= self.horizon.max_length {
                self.fire(Rule::Square, BoardSpec::rect(n, n * k), vec![sq], None)?;
                self.fire(Rule::Square, BoardSpec::rect(n * k, n), vec![sq], None)?;
                k += 1;
            }
        }
        Ok(())
    }

    fn subtraction(&mut self) -> Result<(), Contradiction> {
        let keys: Vec<BoardKey> = self
            .kb
            .keys()
            .filter(|k| k.topology == Topology::Rectangle && k.width != k.length)
            .copied()
            .collect();
        for p in keys {
            let set = self.kb.get(&p);
            if p.width < p.length && set.is_subset(nonneg()) {
                let target = BoardSpec::rect(p.length - p.width, p.length);
                self.fire(Rule::Subtraction, target, vec![p], None)?;
            } else if p.width > p.length && set.is_subset(nonpos()) {
                let target = BoardSpec::rect(p.width, p.width - p.length);
                self.fire(Rule::Subtraction, target, vec![p], None)?;
            }
        }
        Ok(())
    }

    fn topology_chain(&mut self) -> Result<(), Contradiction> {
        let keys: Vec<BoardKey> = self.kb.keys().copied().collect();
        for k in keys {
            for t in Topology::ALL {
                if t == k.topology {
                    continue;
                }
                let (a, b) = (chain_rank(t), chain_rank(k.topology));
                if a == b {
                    continue;
                }
                let other = BoardSpec::with_topology(t, k.width, k.length);
                self.fire(Rule::TopologyChain, other, vec![k], None)?;
            }
        }
        Ok(())
    }

    fn torus_table(&mut self) -> Result<(), Contradiction> {
        for n in 2..=self.horizon.max_length {
            let (r, prev) = (BoardSpec::rect(2, n), BoardSpec::rect(2, n - 1));
            if self.known(&r) && self.known(&prev) {
                let torus = BoardSpec::with_topology(Topology::Torus, 2, n);
                self.fire(Rule::TorusTable, torus, vec![r, prev], None)?;
            }
        }
        Ok(())
    }

    fn values(&mut self) -> Result<(), Contradiction> {
        let keys: Vec<BoardKey> = self.kb.bound_keys().copied().collect();
        for key in keys {
            let entries = self.kb.bounds_for(&key).to_vec();
            for e in entries {
                let side = match e.bound.side {
                    BoundSide::Upper => "upper",
                    BoundSide::Lower => "lower",
                    BoundSide::Exact => "exact",
                };
                let detail = format!("{side} {}", e.bound.bound);
                self.fire(Rule::ValueSign, key, Vec::new(), Some(detail))?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SaturationReport {
    pub sweeps: usize,
    pub refinements: usize,
    pub solved: usize,
    pub partial: usize,
}

/// Applies the enabled rules in a fixed order until nothing changes.
pub fn saturate(
    kb: &mut KnowledgeBase,
    horizon: Horizon,
    rules: RuleSet,
) -> Result<SaturationReport, Contradiction> {
    if rules.values {
        bounds::propagate(kb, horizon);
    }
    let mut driver = Driver {
        kb,
        horizon,
        changed: 0,
    };
    let mut report = SaturationReport::default();
    loop {
        let before = driver.changed;
        if rules.values {
            driver.values()?;
        }
        if rules.transpose {
            driver.transpose()?;
        }
        if rules.topology_chain {
            driver.topology_chain()?;
        }
        if rules.torus_table {
            driver.torus_table()?;
        }
        if rules.square {
            driver.square()?;
        }
        if rules.subtraction {
            driver.subtraction()?;
        }
        if rules.split_width2 {
            driver.split_width2()?;
        }
        if rules.h_concat {
            driver.h_concat()?;
        }
        if rules.v_stack {
            driver.v_stack()?;
        }
        report.sweeps += 1;
        if driver.changed == before {
            break;
        }
    }
    report.refinements = driver.changed;
    let (solved, partial) = driver.kb.count_by_status();
    report.solved = solved;
    report.partial = partial;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::fact::Fact;

    fn seed(kb: &mut KnowledgeBase, w: u16, l: u16, set: OutcomeSet) {
        kb.add_fact(Fact {
            key: BoardSpec::rect(w, l),
            outcomes: set,
            provenance: Provenance::Asserted {
                citation: "test".into(),
            },
        })
        .unwrap();
    }

    fn small() -> Horizon {
        Horizon {
            max_width: 6,
            max_length: 30,
        }
    }

    #[test]
    fn concat_of_two_losses() {
        let mut kb = KnowledgeBase::new();
        seed(&mut kb, 2, 4, H.into());
        saturate(&mut kb, small(), RuleSet::default()).unwrap();
        for k in 1..=7 {
            assert_eq!(kb.get(&BoardSpec::rect(2, 4 * k)), H.into());
        }
        assert_eq!(kb.get(&BoardSpec::rect(8, 2)), V.into());
    }

    #[test]
    fn combined_tables_give_first() {
        let mut kb = KnowledgeBase::new();
        for (n, c) in [(1, V), (2, First), (3, First), (4, H), (5, V)] {
            seed(&mut kb, 2, n, c.into());
        }
        saturate(&mut kb, small(), RuleSet::default()).unwrap();
        assert_eq!(kb.get(&BoardSpec::rect(2, 6)), First.into());
        assert_eq!(kb.get(&BoardSpec::rect(2, 7)), First.into());
    }

    #[test]
    fn six_by_twelve() {
        let mut kb = KnowledgeBase::new();
        seed(&mut kb, 6, 6, First.into());
        seed(&mut kb, 6, 4, First.into());
        seed(&mut kb, 6, 8, H.into());
        let h = Horizon {
            max_width: 13,
            max_length: 24,
        };
        saturate(&mut kb, h, RuleSet::default()).unwrap();
        assert_eq!(kb.get(&BoardSpec::rect(6, 12)), H.into());
    }

    #[test]
    fn wrong_seed_is_a_contradiction() {
        let mut kb = KnowledgeBase::new();
        seed(&mut kb, 2, 4, V.into());
        seed(&mut kb, 2, 8, H.into());
        assert!(saturate(&mut kb, small(), RuleSet::default()).is_err());
    }

    #[test]
    fn square_rule_orientation() {
        let sq = BoardSpec::rect(5, 5);
        let second = [OutcomeSet::single(Second)];
        assert_eq!(
            conclude(Rule::Square, &BoardSpec::rect(5, 10), &[sq], &second, None),
            nonpos()
        );
        assert_eq!(
            conclude(Rule::Square, &BoardSpec::rect(10, 5), &[sq], &second, None),
            nonneg()
        );
        let first = [OutcomeSet::single(First)];
        assert_eq!(
            conclude(Rule::Square, &BoardSpec::rect(5, 15), &[sq], &first, None),
            OutcomeSet::of(&[First, H])
        );
    }

    #[test]
    fn torus_table_rows() {
        let t = BoardSpec::with_topology(Topology::Torus, 2, 5);
        let p = [BoardSpec::rect(2, 5), BoardSpec::rect(2, 4)];
        assert_eq!(
            conclude(Rule::TorusTable, &t, &p, &[V.into(), H.into()], None),
            nonpos()
        );
        assert_eq!(
            conclude(Rule::TorusTable, &t, &p, &[First.into(), V.into()], None),
            First.into()
        );
    }
}
