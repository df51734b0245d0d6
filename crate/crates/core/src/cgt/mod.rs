//! Canonical-form partizan game values.

pub mod dyadic;
pub mod game;
pub mod notation;
pub mod valuation;

pub use dyadic::{Dyadic, DyadicError};
pub use game::{canonicalize, Comparison, GameValue};
pub use notation::{parse as parse_value, render as render_value, NotationError};
pub use valuation::{value, ValueLimits};

use crate::outcome::OutcomeClass;

/// Outcome class from the sign of `g`.
pub fn outcome_of_value(g: GameValue) -> OutcomeClass {
    g.outcome()
}
