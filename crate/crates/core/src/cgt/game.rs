//! Canonical forms of short partizan games.
//!
//! Every value lives in a process-wide hash-consed store, so a
//! [`GameValue`] is a small copyable handle and two handles are equal
//! exactly when the games are equal. Option lists are sorted by a
//! structural order that does not depend on insertion history.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, LazyLock};

use parking_lot::RwLock;

use super::dyadic::Dyadic;
use crate::outcome::OutcomeClass;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct GameValue(u32);

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Node {
    Number(Dyadic),
    Form {
        left: Arc<[GameValue]>,
        right: Arc<[GameValue]>,
    },
}

#[derive(Default)]
struct Store {
    nodes: Vec<Arc<Node>>,
    index: HashMap<Arc<Node>, u32>,
}

#[derive(Default)]
struct Caches {
    leq: HashMap<(GameValue, GameValue), bool>,
    add: HashMap<(GameValue, GameValue), GameValue>,
    neg: HashMap<GameValue, GameValue>,
}

static STORE: LazyLock<RwLock<Store>> = LazyLock::new(Default::default);
static CACHES: LazyLock<RwLock<Caches>> = LazyLock::new(Default::default);

fn intern(node: Node) -> GameValue {
    if let Some(&id) = STORE.read().index.get(&node) {
        return GameValue(id);
    }
    let mut store = STORE.write();
    if let Some(&id) = store.index.get(&node) {
        return GameValue(id);
    }
    let id = u32::try_from(store.nodes.len()).expect("game store exhausted");
    let node = Arc::new(node);
    store.nodes.push(node.clone());
    store.index.insert(node, id);
    GameValue(id)
}

/// Number of distinct values created so far in this process.
pub fn store_size() -> usize {
    STORE.read().nodes.len()
}

/// Result of comparing two games.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Comparison {
    Less,
    Greater,
    Equal,
    Confused,
}

impl GameValue {
    pub fn number(x: Dyadic) -> GameValue {
        intern(Node::Number(x))
    }

    pub fn integer(n: i64) -> GameValue {
        GameValue::number(Dyadic::integer(n))
    }

    pub fn zero() -> GameValue {
        GameValue::integer(0)
    }

    /// `* = {0|0}`.
    pub fn star() -> GameValue {
        let z = GameValue::zero();
        GameValue::from_options(vec![z], vec![z])
    }

    pub fn node(self) -> Arc<Node> {
        STORE.read().nodes[self.0 as usize].clone()
    }

    pub fn id(self) -> u32 {
        self.0
    }

    pub fn as_number(self) -> Option<Dyadic> {
        match *self.node() {
            Node::Number(x) => Some(x),
            Node::Form { .. } => None,
        }
    }

    pub fn is_number(self) -> bool {
        self.as_number().is_some()
    }

    /// Left options of the canonical form (numbers included).
    pub fn left_options(self) -> Vec<GameValue> {
        match &*self.node() {
            Node::Number(x) => number_options(*x).0,
            Node::Form { left, .. } => left.to_vec(),
        }
    }

    pub fn right_options(self) -> Vec<GameValue> {
        match &*self.node() {
            Node::Number(x) => number_options(*x).1,
            Node::Form { right, .. } => right.to_vec(),
        }
    }

    /// Builds `{left | right}` from canonical options and simplifies it.
    pub fn from_options(left: Vec<GameValue>, right: Vec<GameValue>) -> GameValue {
        canonicalize(left, right)
    }

    pub fn neg(self) -> GameValue {
        if let Some(&n) = CACHES.read().neg.get(&self) {
            return n;
        }
        let out = match &*self.node() {
            Node::Number(x) => GameValue::number(x.checked_neg().expect("dyadic overflow")),
            Node::Form { left, right } => {
                let l: Vec<GameValue> = right.iter().map(|g| g.neg()).collect();
                let r: Vec<GameValue> = left.iter().map(|g| g.neg()).collect();
                // negating a canonical form keeps it canonical
                intern_form(l, r)
            }
        };
        let mut c = CACHES.write();
        c.neg.insert(self, out);
        c.neg.insert(out, self);
        out
    }

    /// Disjunctive sum.
    pub fn add(self, other: GameValue) -> GameValue {
        let key = if self <= other {
            (self, other)
        } else {
            (other, self)
        };
        if let Some(&s) = CACHES.read().add.get(&key) {
            return s;
        }
        let out = match (self.as_number(), other.as_number()) {
            (Some(x), Some(y)) => GameValue::number(x.checked_add(y).expect("dyadic overflow")),
            (Some(x), None) if x == Dyadic::ZERO => other,
            (None, Some(y)) if y == Dyadic::ZERO => self,
            (Some(_), None) => translate(other, self),
            (None, Some(_)) => translate(self, other),
            (None, None) => {
                let mut left = Vec::new();
                let mut right = Vec::new();
                for gl in self.left_options() {
                    left.push(gl.add(other));
                }
                for hl in other.left_options() {
                    left.push(self.add(hl));
                }
                for gr in self.right_options() {
                    right.push(gr.add(other));
                }
                for hr in other.right_options() {
                    right.push(self.add(hr));
                }
                canonicalize(left, right)
            }
        };
        CACHES.write().add.insert(key, out);
        out
    }

    pub fn sub(self, other: GameValue) -> GameValue {
        self.add(other.neg())
    }

    /// `k` copies of this game.
    pub fn times(self, k: u32) -> GameValue {
        let mut acc = GameValue::zero();
        let mut base = self;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.add(base);
            }
            base = base.add(base);
            k >>= 1;
        }
        acc
    }

    /// `self <= other` in the game order.
    pub fn leq(self, other: GameValue) -> bool {
        if self == other {
            return true;
        }
        let (x, y) = (self.as_number(), other.as_number());
        if let (Some(x), Some(y)) = (x, y) {
            return x <= y;
        }
        if let Some(&b) = CACHES.read().leq.get(&(self, other)) {
            return b;
        }
        let out = match (x, y) {
            // number avoidance: x <= G iff no G^R <= x
            (Some(_), None) => !other.right_options().into_iter().any(|gr| gr.leq(self)),
            // G <= y iff no G^L >= y
            (None, Some(_)) => !self.left_options().into_iter().any(|gl| other.leq(gl)),
            _ => {
                !self.left_options().into_iter().any(|gl| other.leq(gl))
                    && !other.right_options().into_iter().any(|hr| hr.leq(self))
            }
        };
        CACHES.write().leq.insert((self, other), out);
        out
    }

    pub fn compare(self, other: GameValue) -> Comparison {
        match (self.leq(other), other.leq(self)) {
            (true, true) => Comparison::Equal,
            (true, false) => Comparison::Less,
            (false, true) => Comparison::Greater,
            (false, false) => Comparison::Confused,
        }
    }

    /// Outcome class from the sign of the game.
    pub fn outcome(self) -> OutcomeClass {
        match self.compare(GameValue::zero()) {
            Comparison::Less => OutcomeClass::H,
            Comparison::Greater => OutcomeClass::V,
            Comparison::Equal => OutcomeClass::Second,
            Comparison::Confused => OutcomeClass::First,
        }
    }

    /// Number of distinct nodes reachable from this value.
    pub fn size(self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self];
        while let Some(g) = stack.pop() {
            if !seen.insert(g) {
                continue;
            }
            if let Node::Form { left, right } = &*g.node() {
                stack.extend(left.iter().copied());
                stack.extend(right.iter().copied());
            }
        }
        seen.len()
    }

    /// Left stop: the number reached when Left starts and both play to
    /// the first number.
    pub fn left_stop(self) -> Dyadic {
        match self.as_number() {
            Some(x) => x,
            None => self
                .left_options()
                .into_iter()
                .map(|g| g.right_stop())
                .max()
                .expect("non-number games have left options"),
        }
    }

    pub fn right_stop(self) -> Dyadic {
        match self.as_number() {
            Some(x) => x,
            None => self
                .right_options()
                .into_iter()
                .map(|g| g.left_stop())
                .min()
                .expect("non-number games have right options"),
        }
    }

    /// Total structural order used to normalise option lists.
    pub fn structural_cmp(self, other: GameValue) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        match (&*self.node(), &*other.node()) {
            (Node::Number(x), Node::Number(y)) => x.cmp(y),
            (Node::Number(_), Node::Form { .. }) => Ordering::Less,
            (Node::Form { .. }, Node::Number(_)) => Ordering::Greater,
            (Node::Form { left: l1, right: r1 }, Node::Form { left: l2, right: r2 }) => {
                cmp_lists(l1, l2).then_with(|| cmp_lists(r1, r2))
            }
        }
    }
}

fn cmp_lists(a: &[GameValue], b: &[GameValue]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        for (x, y) in a.iter().zip(b) {
            let c = x.structural_cmp(*y);
            if c != Ordering::Equal {
                return c;
            }
        }
        Ordering::Equal
    })
}

fn number_options(x: Dyadic) -> (Vec<GameValue>, Vec<GameValue>) {
    if x.is_integer() {
        let n = x.numerator();
        if n > 0 {
            (vec![GameValue::integer(n - 1)], vec![])
        } else if n < 0 {
            (vec![], vec![GameValue::integer(n + 1)])
        } else {
            (vec![], vec![])
        }
    } else {
        let u = x.unit();
        (
            vec![GameValue::number(x.checked_sub(u).expect("dyadic overflow"))],
            vec![GameValue::number(x.checked_add(u).expect("dyadic overflow"))],
        )
    }
}

/// `x + G` for a number `x` and a non-number canonical `G`: the options
/// translate and the form stays canonical.
fn translate(g: GameValue, x: GameValue) -> GameValue {
    let left = g.left_options().into_iter().map(|o| o.add(x)).collect();
    let right = g.right_options().into_iter().map(|o| o.add(x)).collect();
    intern_form(left, right)
}

fn sort_options(v: &mut Vec<GameValue>) {
    v.sort_by(|a, b| a.structural_cmp(*b));
    v.dedup();
}

fn intern_form(mut left: Vec<GameValue>, mut right: Vec<GameValue>) -> GameValue {
    sort_options(&mut left);
    sort_options(&mut right);
    intern(Node::Form {
        left: left.into(),
        right: right.into(),
    })
}

/// `x <= {L | R}` for canonical `x` and an arbitrary form.
fn leq_form_right(x: GameValue, left: &[GameValue], right: &[GameValue]) -> bool {
    !x.left_options()
        .into_iter()
        .any(|xl| leq_form_left(left, right, xl))
        && !right.iter().any(|gr| gr.leq(x))
}

/// `{L | R} <= y` for an arbitrary form and canonical `y`.
fn leq_form_left(left: &[GameValue], right: &[GameValue], y: GameValue) -> bool {
    !left.iter().any(|gl| y.leq(*gl))
        && !y
            .right_options()
            .into_iter()
            .any(|yr| leq_form_right(yr, left, right))
}

/// Keeps only maximal options (for Left) or minimal ones (for Right).
fn remove_dominated(options: &mut Vec<GameValue>, keep_max: bool) {
    sort_options(options);
    let snapshot = options.clone();
    options.retain(|&g| {
        !snapshot.iter().any(|&h| {
            h != g && if keep_max { g.leq(h) } else { h.leq(g) }
        })
    });
}

/// Simplifies `{left | right}` (options individually canonical) to
/// canonical form: dominated options removed, reversible options
/// bypassed, numbers recognised by the simplicity rule.
pub fn canonicalize(left: Vec<GameValue>, right: Vec<GameValue>) -> GameValue {
    let mut left = left;
    let mut right = right;
    loop {
        remove_dominated(&mut left, true);
        remove_dominated(&mut right, false);
        let mut changed = false;
        // Left option A reverses through A^R when A^R <= G.
        let mut i = 0;
        while i < left.len() {
            let a = left[i];
            let reverse = a
                .right_options()
                .into_iter()
                .find(|&ar| leq_form_right(ar, &left, &right));
            if let Some(ar) = reverse {
                left.swap_remove(i);
                left.extend(ar.left_options());
                changed = true;
                break;
            }
            i += 1;
        }
        if changed {
            continue;
        }
        let mut i = 0;
        while i < right.len() {
            let b = right[i];
            let reverse = b
                .left_options()
                .into_iter()
                .find(|&bl| leq_form_left(&left, &right, bl));
            if let Some(bl) = reverse {
                right.swap_remove(i);
                right.extend(bl.right_options());
                changed = true;
                break;
            }
            i += 1;
        }
        if !changed {
            break;
        }
    }
    let all_numbers = left.iter().chain(right.iter()).all(|g| g.is_number());
    if all_numbers {
        let lo = left.iter().filter_map(|g| g.as_number()).max();
        let hi = right.iter().filter_map(|g| g.as_number()).min();
        let ordered = match (lo, hi) {
            (Some(a), Some(b)) => a < b,
            _ => true,
        };
        if ordered {
            let x = Dyadic::simplest_between(lo, hi).expect("dyadic overflow");
            return GameValue::number(x);
        }
    }
    intern_form(left, right)
}

impl fmt::Display for GameValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::notation::render(*self))
    }
}
