//! Outcome-set algebra: what is known about a sum, and what a known
//! bound says about the game it bounds.

use crate::outcome::{OutcomeClass, OutcomeSet};
use OutcomeClass::*;

fn transfer(known: OutcomeSet, f: impl Fn(OutcomeClass) -> OutcomeSet) -> OutcomeSet {
    known
        .iter()
        .fold(OutcomeSet::EMPTY, |acc, c| acc.union(f(c)))
}

/// Knowledge of `G` given `G <= B` and knowledge of `B`.
pub fn outcome_from_upper_bound(bound: OutcomeSet) -> OutcomeSet {
    transfer(bound, |c| match c {
        H => OutcomeSet::single(H),
        Second => OutcomeSet::of(&[Second, H]),
        First => OutcomeSet::of(&[First, H]),
        V => OutcomeSet::ALL,
    })
}

/// Knowledge of `G` given `G >= B` and knowledge of `B`.
pub fn outcome_from_lower_bound(bound: OutcomeSet) -> OutcomeSet {
    outcome_from_upper_bound(bound.negated()).negated()
}

fn sum_of(a: OutcomeClass, b: OutcomeClass) -> OutcomeSet {
    match (a, b) {
        (Second, x) | (x, Second) => OutcomeSet::single(x),
        (V, V) => OutcomeSet::single(V),
        (H, H) => OutcomeSet::single(H),
        (V, First) | (First, V) => OutcomeSet::of(&[V, First]),
        (H, First) | (First, H) => OutcomeSet::of(&[H, First]),
        _ => OutcomeSet::ALL,
    }
}

/// Knowledge of `A + B` from knowledge of the summands.
pub fn outcome_of_sum(a: OutcomeSet, b: OutcomeSet) -> OutcomeSet {
    let mut out = OutcomeSet::EMPTY;
    for x in a.iter() {
        for y in b.iter() {
            out = out.union(sum_of(x, y));
        }
    }
    out
}
