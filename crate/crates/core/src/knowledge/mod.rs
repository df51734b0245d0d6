//! Knowledge base of outcome facts and value bounds, and the rules that
//! refine them.

pub mod algebra;
pub mod atlas;
mod bounds;
pub mod explain;
pub mod fact;
pub mod kb;
pub mod rules;
pub mod seeds;
pub mod tail;

pub use algebra::{outcome_from_lower_bound, outcome_from_upper_bound, outcome_of_sum};
pub use fact::{parse_records, BoardKey, BoundSide, Fact, Provenance, Record, Rule, ValueBound};
pub use kb::{Contradiction, KnowledgeBase, Step};
pub use rules::{conclude, saturate, Horizon, RuleSet, SaturationReport};
pub use atlas::{atlas, Atlas, AtlasCell, Source};
pub use explain::{alternatives, explain, replay, Alternative, ReplayError, TraceNode, UnknownKey};
pub use tail::{tail_theorem, TailCertificate};
