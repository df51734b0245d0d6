//! Tail certificates: a window of Hepzibah wins that repeats forever.
//!
//! If `[w x p] = H` and `[w x n] = H` for `n0 <= n < n0 + p`, then every
//! longer board splits into one window board plus copies of the `p` piece,
//! and the concatenation rule keeps the sum negative.

use serde::Serialize;

use super::fact::Rule;
use super::kb::KnowledgeBase;
use super::rules::conclude;
use crate::board::{BoardSpec, Topology};
use crate::outcome::{OutcomeClass, OutcomeSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TailCertificate {
    pub width: u16,
    /// First length of the window.
    pub n0: u16,
    /// Length of the repeated piece.
    pub p: u16,
}

fn is_h(kb: &KnowledgeBase, w: u16, n: u16) -> bool {
    kb.get(&BoardSpec::rect(w, n)) == OutcomeSet::single(OutcomeClass::H)
}

/// The period piece is the shortest board of this width known to be a
/// Hepzibah win; the window starts at the first run of `p` such boards.
/// Only lengths the knowledge base holds are considered, so `None` means
/// no run fits below the horizon.
pub fn tail_theorem(kb: &KnowledgeBase, width: u16) -> Option<TailCertificate> {
    let max = kb
        .keys()
        .filter(|k| k.topology == Topology::Rectangle && k.width == width)
        .map(|k| k.length)
        .max()?;
    let p = (1..=max).find(|&n| is_h(kb, width, n))?;
    let mut run = 0;
    for n in 1..=max {
        run = if is_h(kb, width, n) { run + 1 } else { 0 };
        if run == p {
            return Some(TailCertificate {
                width,
                n0: n + 1 - p,
                p,
            });
        }
    }
    None
}

impl TailCertificate {
    /// Checks the certificate against the knowledge base without trusting
    /// how it was found: the piece and the window are Hepzibah wins, and
    /// gluing the piece to the window's first board gives one again.
    pub fn check(&self, kb: &KnowledgeBase) -> bool {
        let TailCertificate { width, n0, p } = *self;
        if p == 0 || n0 == 0 || !is_h(kb, width, p) {
            return false;
        }
        if !(n0..n0 + p).all(|n| is_h(kb, width, n)) {
            return false;
        }
        let (a, b) = (BoardSpec::rect(width, n0), BoardSpec::rect(width, p));
        let next = conclude(
            Rule::HConcat,
            &BoardSpec::rect(width, n0 + p),
            &[a, b],
            &[kb.get(&a), kb.get(&b)],
            None,
        );
        next == OutcomeSet::single(OutcomeClass::H)
    }

    /// Whether the certificate settles `width x n`.
    pub fn covers(&self, n: u16) -> bool {
        n >= self.n0
    }
}
