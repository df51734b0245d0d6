//! The who-wins grid: one cell per board, as a text table or records.

use serde::Serialize;

use super::fact::BoardKey;
use super::kb::KnowledgeBase;
use crate::board::{BoardSpec, Topology};
use crate::outcome::OutcomeSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Searched,
    Asserted,
    Derived,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AtlasCell {
    #[serde(flatten)]
    pub key: BoardKey,
    pub outcomes: OutcomeSet,
    pub label: String,
    pub provenance: Source,
}

impl AtlasCell {
    pub fn of(kb: &KnowledgeBase, key: BoardKey) -> Self {
        let outcomes = kb.get(&key);
        let provenance = match kb.provenance_summary(&key) {
            Some("searched") => Source::Searched,
            Some("asserted") => Source::Asserted,
            Some(_) => Source::Derived,
            None => Source::Unknown,
        };
        AtlasCell {
            key,
            outcomes,
            label: outcomes.label(),
            provenance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Atlas {
    pub topology: Topology,
    pub max_width: u16,
    pub max_length: u16,
    /// `rows[w - 1][l - 1]` is the `w x l` board.
    pub rows: Vec<Vec<AtlasCell>>,
}

pub fn atlas(kb: &KnowledgeBase, topology: Topology, max_width: u16, max_length: u16) -> Atlas {
    let rows = (1..=max_width)
        .map(|w| {
            (1..=max_length)
                .map(|l| AtlasCell::of(kb, BoardSpec::with_topology(topology, w, l)))
                .collect()
        })
        .collect();
    Atlas {
        topology,
        max_width,
        max_length,
        rows,
    }
}

impl Atlas {
    pub fn cell(&self, width: u16, length: u16) -> Option<&AtlasCell> {
        self.rows
            .get(width as usize - 1)?
            .get(length as usize - 1)
    }

    /// Fixed-width text grid, widths down and lengths across. Cells
    /// settled by search or assertion are marked with `*`.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} (width down, length across; * = searched or asserted)\n", self.topology);
        out.push_str("   ");
        for l in 1..=self.max_length {
            out.push_str(&format!("{l:>4}"));
        }
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(&format!("{:>3}", i + 1));
            for c in row {
                let mark = match c.provenance {
                    Source::Searched | Source::Asserted => "*",
                    _ => "",
                };
                out.push_str(&format!("{:>4}", format!("{}{mark}", c.label)));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("atlas serializes")
    }
}
