//! Upper value bounds for long boards of a fixed width, from known values
//! of short ones: `[w x (a+b)] <= [w x a] + [w x b]`.
//!
//! Each length keeps a few incomparable game bounds while they stay small.
//! Numbers above those bounds are added as well, which reaches lengths
//! where the game sums grew too large.

use super::fact::{BoardKey, BoundSide, Provenance, Rule, ValueBound};
use super::kb::KnowledgeBase;
use super::rules::Horizon;
use crate::board::{BoardSpec, Topology};
use crate::cgt::{Dyadic, GameValue};

/// Game sums larger than this are not kept.
const MAX_SIZE: usize = 256;
/// Incomparable game bounds kept per length.
const KEEP: usize = 3;

/// A number at or above `g`.
fn number_above(g: GameValue) -> Dyadic {
    if let Some(x) = g.as_number() {
        return x;
    }
    let stop = g.left_stop();
    if g.leq(GameValue::number(stop)) {
        stop
    } else {
        // anything beyond the left stop exceeds the game
        stop.checked_add(Dyadic::new(1, 10).expect("small exponent"))
            .expect("bound fits")
    }
}

#[derive(Clone)]
struct Cand {
    value: GameValue,
    /// Index of the bound entry in the knowledge base.
    entry: usize,
}

/// Derives upper bounds for every rectangle width holding a value seed.
pub fn propagate(kb: &mut KnowledgeBase, horizon: Horizon) {
    let mut widths: Vec<u16> = kb
        .bound_keys()
        .filter(|k| k.topology == Topology::Rectangle)
        .map(|k| k.width)
        .collect();
    widths.sort_unstable();
    widths.dedup();
    for w in widths {
        propagate_width(kb, horizon, w);
    }
}

fn upper(kb: &KnowledgeBase, key: &BoardKey) -> Vec<Cand> {
    kb.bounds_for(key)
        .iter()
        .enumerate()
        .filter(|(_, e)| e.bound.is_upper())
        .map(|(i, e)| Cand {
            value: e.bound.bound,
            entry: i,
        })
        .collect()
}

fn derived(key: BoardKey, value: GameValue, a: BoardKey, b: BoardKey) -> ValueBound {
    ValueBound {
        key,
        bound: value,
        side: BoundSide::Upper,
        provenance: Provenance::Derived {
            rule: Rule::BoundSum,
            premises: vec![a, b],
        },
    }
}

fn propagate_width(kb: &mut KnowledgeBase, horizon: Horizon, w: u16) {
    let max_len = horizon.max_length;
    let key = |n: u16| BoardSpec::rect(w, n);
    let mut games: Vec<Vec<Cand>> = vec![Vec::new(); max_len as usize + 1];
    for n in 1..=max_len {
        let mut cands = upper(kb, &key(n));
        // (value, split length, entries of the two summands)
        let mut all: Vec<(GameValue, Option<(u16, usize, usize)>)> =
            cands.iter().map(|c| (c.value, None)).collect();
        for a in 1..=n / 2 {
            for u in &games[a as usize] {
                for v in &games[(n - a) as usize] {
                    let sum = u.value.add(v.value);
                    if sum.size() <= MAX_SIZE {
                        all.push((sum, Some((a, u.entry, v.entry))));
                    }
                }
            }
        }
        all.sort_by_key(|x| x.0);
        all.dedup_by(|x, y| x.0 == y.0);
        let mut minimal: Vec<_> = all
            .iter()
            .filter(|(g, _)| !all.iter().any(|(h, _)| h != g && h.leq(*g)))
            .cloned()
            .collect();
        minimal.sort_by(|x, y| {
            number_above(x.0)
                .cmp(&number_above(y.0))
                .then(x.0.size().cmp(&y.0.size()))
        });
        minimal.truncate(KEEP);
        for (g, split) in minimal {
            if cands.iter().any(|c| c.value == g) {
                continue;
            }
            let (a, ue, ve) = split.expect("seed bounds are already present");
            let from = vec![(key(a), ue), (key(n - a), ve)];
            let entry = kb.add_bound(derived(key(n), g, key(a), key(n - a)), from);
            cands.push(Cand { value: g, entry });
        }
        games[n as usize] = cands;
    }
    // numeric bounds for every length
    let mut num: Vec<Option<(Dyadic, usize)>> = vec![None; max_len as usize + 1];
    for n in 1..=max_len {
        let mut best: Option<(Dyadic, usize)> = upper(kb, &key(n))
            .into_iter()
            .map(|c| (number_above(c.value), c.entry))
            .min_by(|x, y| x.0.cmp(&y.0));
        let mut via: Option<(Dyadic, u16)> = None;
        for a in 1..=n / 2 {
            if let (Some((x, _)), Some((y, _))) = (num[a as usize], num[(n - a) as usize]) {
                let s = x.checked_add(y).expect("bound fits");
                if via.is_none_or(|(v, _)| s < v) {
                    via = Some((s, a));
                }
            }
        }
        if let Some((s, a)) = via {
            if best.is_none_or(|(b, _)| s < b) {
                let from = vec![
                    (key(a), num[a as usize].expect("set above").1),
                    (key(n - a), num[(n - a) as usize].expect("set above").1),
                ];
                let entry = kb.add_bound(
                    derived(key(n), GameValue::number(s), key(a), key(n - a)),
                    from,
                );
                best = Some((s, entry));
            }
        }
        num[n as usize] = best;
    }
}
