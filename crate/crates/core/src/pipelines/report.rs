//! Audits shared by the pipeline reports.

use serde::{Deserialize, Serialize};

use crate::graph::{verify_cycle, Digraph, HamCycle};

/// Verification and pairwise arc-disjointness of a list of cycles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisjointAudit {
    pub cycles: usize,
    pub all_verified: bool,
    /// Index of the first cycle that is not a Hamilton cycle of the host.
    pub first_unverified: Option<usize>,
    /// Arc uses beyond the first, summed over all arcs.
    pub repeated_arcs: usize,
    /// First cycle index that reuses an arc, with that arc.
    pub first_repeat: Option<(usize, (usize, usize))>,
}

impl DisjointAudit {
    pub fn passed(&self) -> bool {
        self.all_verified && self.repeated_arcs == 0
    }
}

pub fn audit_disjoint(d: &Digraph, cycles: &[HamCycle]) -> DisjointAudit {
    let mut used = Digraph::empty(d.n());
    let mut audit = DisjointAudit {
        cycles: cycles.len(),
        all_verified: true,
        first_unverified: None,
        repeated_arcs: 0,
        first_repeat: None,
    };
    for (i, c) in cycles.iter().enumerate() {
        if !verify_cycle(d, c) {
            audit.all_verified = false;
            audit.first_unverified.get_or_insert(i);
            continue;
        }
        for (u, v) in c.arcs() {
            if !used.add_arc(u, v) {
                audit.repeated_arcs += 1;
                audit.first_repeat.get_or_insert((i, (u, v)));
            }
        }
    }
    audit
}

/// Verification of a list of cycles and the arcs of the host they miss.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverAudit {
    pub cycles: usize,
    pub all_verified: bool,
    pub first_unverified: Option<usize>,
    pub uncovered: Vec<(usize, usize)>,
}

impl CoverAudit {
    pub fn passed(&self) -> bool {
        self.all_verified && self.uncovered.is_empty()
    }
}

pub fn audit_cover(d: &Digraph, cycles: &[HamCycle]) -> CoverAudit {
    let mut seen = Digraph::empty(d.n());
    let mut audit = CoverAudit {
        cycles: cycles.len(),
        all_verified: true,
        first_unverified: None,
        uncovered: Vec::new(),
    };
    for (i, c) in cycles.iter().enumerate() {
        if !verify_cycle(d, c) {
            audit.all_verified = false;
            audit.first_unverified.get_or_insert(i);
            continue;
        }
        for (u, v) in c.arcs() {
            seen.add_arc(u, v);
        }
    }
    audit.uncovered = d.arcs().filter(|&(u, v)| !seen.has_arc(u, v)).collect();
    audit
}
