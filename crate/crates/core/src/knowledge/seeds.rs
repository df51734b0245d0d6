//! The shipped seed catalog and search-generated seeds.

use super::fact::{parse_records, Fact, Provenance, Record};
use crate::board::{BoardSpec, Position, Topology};
use crate::outcome::OutcomeSet;
use crate::search::{SearchLimits, Solver};

const CATALOG: &str = include_str!("../../data/seeds.jsonl");

/// Published results, one record per claim with its citation.
pub fn catalog() -> Vec<Record> {
    parse_records(CATALOG).expect("shipped seed catalog parses")
}

/// Which boards [`searched`] covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchScope {
    pub topology: Topology,
    pub max_cells: usize,
    /// Skip boards of this width (the width-2 table is derived, not searched).
    pub skip_width: Option<u16>,
}

/// Searches every board in scope with `width <= length`; the other
/// orientation follows by transposition. Boards that hit the limits are
/// left out.
pub fn searched(scope: SearchScope, limits: SearchLimits) -> Vec<Fact> {
    let mut out = Vec::new();
    let mut solver = Solver::new(limits);
    for w in 1..=scope.max_cells as u16 {
        if Some(w) == scope.skip_width {
            continue;
        }
        for l in w..=scope.max_cells as u16 {
            if (w as usize) * (l as usize) > scope.max_cells {
                break;
            }
            let spec = BoardSpec::with_topology(scope.topology, w, l);
            let fact = solve_with(&mut solver, spec);
            if !fact.is_unknown() {
                out.push(fact);
            }
        }
    }
    out
}

/// The boards searched before derivation by default.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedPlan {
    pub rect: SearchScope,
    pub extra: Vec<BoardSpec>,
}

impl Default for SeedPlan {
    fn default() -> Self {
        let torus = |w, l| BoardSpec::with_topology(Topology::Torus, w, l);
        SeedPlan {
            rect: SearchScope {
                topology: Topology::Rectangle,
                max_cells: 24,
                skip_width: Some(2),
            },
            extra: vec![
                torus(2, 1),
                torus(2, 5),
                torus(2, 9),
                torus(1, 1),
                torus(2, 2),
                torus(3, 3),
                torus(4, 4),
            ],
        }
    }
}

impl SeedPlan {
    pub fn run(&self, limits: SearchLimits) -> Vec<Fact> {
        let mut out = searched(self.rect, limits);
        let mut solver = Solver::new(limits);
        for spec in &self.extra {
            let fact = solve_with(&mut solver, *spec);
            if !fact.is_unknown() {
                out.push(fact);
            }
        }
        out
    }
}

/// The catalog followed by the default searched facts.
pub fn standard(limits: SearchLimits) -> Vec<Record> {
    let mut out = catalog();
    out.extend(SeedPlan::default().run(limits).into_iter().map(Record::Fact));
    out
}

fn solve_with(solver: &mut Solver, spec: BoardSpec) -> Fact {
    let result = Position::empty(spec).ok().map(|pos| solver.outcome(&pos));
    Fact {
        key: spec,
        outcomes: result
            .and_then(|r| r.outcome)
            .map_or(OutcomeSet::ALL, OutcomeSet::single),
        provenance: Provenance::Searched {
            nodes: result.map_or(0, |r| r.nodes_visited),
        },
    }
}
