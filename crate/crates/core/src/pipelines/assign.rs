//! Random partitions and the assignment of arcs to subdigraphs.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{make_partition, Digraph, PartitionScheme};
use crate::seed;

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignMode {
    /// Every arc goes to at most one subdigraph.
    Pack,
    /// Interior arcs go to one subdigraph; exterior arcs are shared.
    Cover,
}

/// Deviation of `|A_e|` and `|B_e|` from their expectations over all ordered pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BalanceReport {
    pub expected_a: f64,
    pub expected_b: f64,
    pub min_a: usize,
    pub max_a: usize,
    pub min_b: usize,
    pub max_b: usize,
    /// Pairs with `|A_e|` or `|B_e|` outside `(1 ± 0.5)` times the expectation.
    pub out_of_band: usize,
    pub ok: bool,
}

/// Per-arc multiplicities and the chosen subdigraph `h(e)`.
#[derive(Clone, Debug)]
pub struct EdgeAssignment {
    pub mode: AssignMode,
    n: usize,
    owner: Vec<u32>,
    a_size: Vec<u16>,
    b_size: Vec<u16>,
}

impl EdgeAssignment {
    /// Index of the subdigraph that owns arc `u → v` (interior owner in cover mode).
    pub fn owner(&self, u: usize, v: usize) -> Option<usize> {
        match self.owner[u * self.n + v] {
            NONE => None,
            i => Some(i as usize),
        }
    }

    pub fn a_size(&self, u: usize, v: usize) -> usize {
        self.a_size[u * self.n + v] as usize
    }

    pub fn b_size(&self, u: usize, v: usize) -> usize {
        self.b_size[u * self.n + v] as usize
    }

    pub fn unassigned(&self, d: &Digraph) -> usize {
        d.arcs().filter(|&(u, v)| self.owner(u, v).is_none()).count()
    }
}

/// Recomputes `A_e` and `B_e` as index lists.
pub fn class_lists(partitions: &[PartitionScheme], u: usize, v: usize) -> (Vec<usize>, Vec<usize>) {
    use crate::graph::{classify_edge, EdgeClass};
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (i, part) in partitions.iter().enumerate() {
        match classify_edge(part, u, v) {
            EdgeClass::Interior => a.push(i),
            EdgeClass::Exterior => b.push(i),
            EdgeClass::Absent => {}
        }
    }
    (a, b)
}

/// `(interior, exterior)` multiplicity tables over all ordered pairs.
fn multiplicities(n: usize, partitions: &[PartitionScheme]) -> (Vec<u16>, Vec<u16>) {
    let mut a = vec![0u16; n * n];
    let mut b = vec![0u16; n * n];
    for part in partitions {
        let ell = part.ell();
        for j in 1..ell {
            for &u in part.block(j) {
                for &v in part.block(j + 1) {
                    a[u * n + v] += 1;
                }
            }
        }
        for &j in &[0, ell] {
            for &u in part.block(j) {
                for &v in part.block(0).iter().chain(part.block(1)) {
                    if u != v {
                        b[u * n + v] += 1;
                    }
                }
            }
        }
    }
    (a, b)
}

pub fn balance_report(n: usize, partitions: &[PartitionScheme]) -> BalanceReport {
    let part = &partitions[0];
    let t = partitions.len() as f64;
    let (nf, m, s) = (n as f64, part.m() as f64, part.s() as f64);
    let expected_a = (part.ell() as f64 - 1.0) * m * m * t / (nf * (nf - 1.0));
    let expected_b = (m * m + 2.0 * s * m + s * (s - 1.0)) * t / (nf * (nf - 1.0));
    let (a, b) = multiplicities(n, partitions);
    let mut rep = BalanceReport {
        expected_a,
        expected_b,
        min_a: usize::MAX,
        max_a: 0,
        min_b: usize::MAX,
        max_b: 0,
        out_of_band: 0,
        ok: true,
    };
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let (x, y) = (a[u * n + v] as usize, b[u * n + v] as usize);
            rep.min_a = rep.min_a.min(x);
            rep.max_a = rep.max_a.max(x);
            rep.min_b = rep.min_b.min(y);
            rep.max_b = rep.max_b.max(y);
            let off = |c: usize, e: f64| (c as f64 - e).abs() > 0.5 * e;
            if off(x, expected_a) || off(y, expected_b) {
                rep.out_of_band += 1;
            }
        }
    }
    rep.ok = rep.out_of_band == 0;
    rep
}

/// `t` independent uniform partitions, resampled while the balance check
/// fails if `enforce` is set.
pub fn sample_partitions(
    n: usize,
    ell: usize,
    s: usize,
    t: usize,
    seed: u64,
    enforce: bool,
    max_resamples: u32,
) -> Result<(Vec<PartitionScheme>, BalanceReport, u32)> {
    let mut attempt = 0;
    loop {
        let base = seed::derive(seed, "resample", u64::from(attempt));
        let parts = (0..t)
            .map(|i| make_partition(n, ell, s, seed::derive(base, "partition", i as u64)))
            .collect::<Result<Vec<_>>>()?;
        let rep = balance_report(n, &parts);
        if rep.ok || !enforce {
            return Ok((parts, rep, attempt));
        }
        attempt += 1;
        if attempt > max_resamples {
            return Err(Error::SetupFailure(format!(
                "balance check failed after {max_resamples} resamples ({} pairs out of band)",
                rep.out_of_band
            )));
        }
    }
}

/// Splits the arcs of `d` among the subdigraphs of `partitions`.
///
/// Pack mode: `h(e) ∈ A_e ∪ B_e`, an element of `A_e` with probability
/// `(1 − 1/α)/|A_e|` and of `B_e` with probability `1/(α|B_e|)`; when one of
/// the two sets is empty the other takes all the mass, and arcs in neither
/// stay unassigned. Cover mode: `h(e)` uniform in `A_e`, and every
/// subdigraph additionally receives all arcs of `d` that are exterior in its
/// partition.
pub fn assign_edges(
    d: &Digraph,
    partitions: &[PartitionScheme],
    mode: AssignMode,
    alpha: f64,
    seed: u64,
) -> Result<(EdgeAssignment, Vec<Digraph>)> {
    let n = d.n();
    if partitions.iter().any(|p| p.n() != n) {
        return Err(Error::InvalidInput("partition size does not match the digraph".into()));
    }
    if alpha <= 1.0 {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must exceed 1")));
    }
    let (a, b) = multiplicities(n, partitions);
    let mut owner = vec![NONE; n * n];
    let mut rng = seed::rng(seed::derive(seed, "assign", 0));
    let mut subs = vec![Digraph::empty(n); partitions.len()];
    for (u, v) in d.arcs() {
        let (ka, kb) = (a[u * n + v] as usize, b[u * n + v] as usize);
        let use_interior = match mode {
            AssignMode::Cover => ka > 0,
            AssignMode::Pack => {
                if ka == 0 && kb == 0 {
                    continue;
                }
                kb == 0 || (ka > 0 && rng.gen_bool(1.0 - 1.0 / alpha))
            }
        };
        if mode == AssignMode::Cover && !use_interior {
            continue;
        }
        let (k, wanted) = if use_interior { (ka, true) } else { (kb, false) };
        let pick = rng.gen_range(0..k);
        let (lists_a, lists_b) = class_lists(partitions, u, v);
        let i = if wanted { lists_a[pick] } else { lists_b[pick] };
        owner[u * n + v] = i as u32;
        subs[i].add_arc(u, v);
    }
    if mode == AssignMode::Cover {
        for (i, part) in partitions.iter().enumerate() {
            let ell = part.ell();
            for &j in &[0, ell] {
                for &u in part.block(j) {
                    for &v in part.block(0).iter().chain(part.block(1)) {
                        if d.has_arc(u, v) {
                            subs[i].add_arc(u, v);
                        }
                    }
                }
            }
        }
    }
    Ok((
        EdgeAssignment {
            mode,
            n,
            owner,
            a_size: a,
            b_size: b,
        },
        subs,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::sample_dnp;

    #[test]
    fn single_partition_pack_keeps_template_arcs() {
        let d = Digraph::complete(20);
        let parts = vec![make_partition(20, 3, 2, 1).unwrap()];
        let (asg, subs) = assign_edges(&d, &parts, AssignMode::Pack, 2.0, 5).unwrap();
        let template = parts[0].interior_arc_count() + parts[0].exterior_arc_count();
        assert_eq!(subs[0].edge_count(), template);
        assert_eq!(asg.unassigned(&d), d.edge_count() - template);
    }

    #[test]
    fn pack_subdigraphs_partition_assigned_arcs() {
        let d = sample_dnp(60, 0.3, 2).unwrap();
        let (parts, _, _) = sample_partitions(60, 4, 8, 10, 3, false, 0).unwrap();
        let (asg, subs) = assign_edges(&d, &parts, AssignMode::Pack, 2.0, 4).unwrap();
        let total: usize = subs.iter().map(Digraph::edge_count).sum();
        assert_eq!(total + asg.unassigned(&d), d.edge_count());
        for (u, v) in d.arcs() {
            if let Some(i) = asg.owner(u, v) {
                assert!(subs[i].has_arc(u, v));
            }
        }
    }

    #[test]
    fn multiplicity_lists_agree() {
        let (parts, _, _) = sample_partitions(30, 3, 3, 6, 9, false, 0).unwrap();
        let d = Digraph::complete(30);
        let (asg, _) = assign_edges(&d, &parts, AssignMode::Cover, 2.0, 1).unwrap();
        for (u, v) in [(0, 1), (5, 9), (29, 3)] {
            let (a, b) = class_lists(&parts, u, v);
            assert_eq!(a.len(), asg.a_size(u, v));
            assert_eq!(b.len(), asg.b_size(u, v));
        }
    }
}
