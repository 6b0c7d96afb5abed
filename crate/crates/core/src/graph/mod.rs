//! Directed and bipartite graphs on dense integer labels, seeded samplers,
//! `(ℓ,s)`-partitions, contraction and cycle lifting.

mod contract;
pub mod io;
mod partition;

pub use contract::{
    contract, layer_bipartite, lift_cycle, path_system_from_matchings, verify_cycle,
    verify_system, HamCycle, PairList, PathSystem,
};
pub use partition::{classify_edge, make_partition, EdgeClass, PartitionScheme};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::seed;

/// A loopless digraph on `0..n` with bitset adjacency in both directions.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Digraph {
    n: usize,
    out: Vec<BitSet>,
    inc: Vec<BitSet>,
    edge_count: usize,
}

impl std::fmt::Debug for Digraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Digraph(n={}, arcs={})", self.n, self.edge_count)
    }
}

impl Digraph {
    pub fn empty(n: usize) -> Self {
        Digraph {
            n,
            out: vec![BitSet::new(n); n],
            inc: vec![BitSet::new(n); n],
            edge_count: 0,
        }
    }

    /// The complete digraph: all `n(n-1)` arcs.
    pub fn complete(n: usize) -> Self {
        let mut d = Digraph::empty(n);
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    d.add_arc(u, v);
                }
            }
        }
        d
    }

    /// The directed cycle `0 → 1 → … → n-1 → 0`.
    pub fn directed_cycle(n: usize) -> Self {
        let mut d = Digraph::empty(n);
        if n >= 2 {
            for u in 0..n {
                d.add_arc(u, (u + 1) % n);
            }
        }
        d
    }

    pub fn from_arcs<I: IntoIterator<Item = (usize, usize)>>(n: usize, arcs: I) -> Result<Self> {
        let mut d = Digraph::empty(n);
        for (u, v) in arcs {
            if u >= n || v >= n {
                return Err(Error::InvalidInput(format!("arc ({u},{v}) out of range for n={n}")));
            }
            if u == v {
                return Err(Error::InvalidInput(format!("self-loop at {u}")));
            }
            d.add_arc(u, v);
        }
        Ok(d)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        u < self.n && self.out[u].contains(v)
    }

    /// Inserts `u → v`; returns false if it was already present. Loops are ignored.
    pub fn add_arc(&mut self, u: usize, v: usize) -> bool {
        if u == v {
            return false;
        }
        if self.out[u].insert(v) {
            self.inc[v].insert(u);
            self.edge_count += 1;
            true
        } else {
            false
        }
    }

    pub fn remove_arc(&mut self, u: usize, v: usize) -> bool {
        if self.out[u].remove(v) {
            self.inc[v].remove(u);
            self.edge_count -= 1;
            true
        } else {
            false
        }
    }

    #[inline]
    pub fn out_row(&self, u: usize) -> &BitSet {
        &self.out[u]
    }

    #[inline]
    pub fn in_row(&self, v: usize) -> &BitSet {
        &self.inc[v]
    }

    #[inline]
    pub fn out_degree(&self, u: usize) -> usize {
        self.out[u].count()
    }

    #[inline]
    pub fn in_degree(&self, v: usize) -> usize {
        self.inc[v].count()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().map(move |v| (u, v)))
    }

    /// `e(X, Y)`: arcs with tail in `x` and head in `y`.
    pub fn arcs_between(&self, x: &BitSet, y: &BitSet) -> usize {
        x.iter().map(|u| self.out[u].intersection_count(y)).sum()
    }

    /// Arcs present in both graphs.
    pub fn intersection(&self, other: &Digraph) -> Digraph {
        assert_eq!(self.n, other.n);
        let mut d = Digraph::empty(self.n);
        for u in 0..self.n {
            let mut row = self.out[u].clone();
            row.intersect_with(&other.out[u]);
            for v in row.iter() {
                d.add_arc(u, v);
            }
        }
        d
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Digraph {
        assert_eq!(perm.len(), self.n);
        let mut d = Digraph::empty(self.n);
        for (u, v) in self.arcs() {
            d.add_arc(perm[u], perm[v]);
        }
        d
    }

    pub fn min_out_degree(&self) -> usize {
        (0..self.n).map(|v| self.out_degree(v)).min().unwrap_or(0)
    }

    pub fn min_in_degree(&self) -> usize {
        (0..self.n).map(|v| self.in_degree(v)).min().unwrap_or(0)
    }
}

/// Undirected bipartite graph between `left` and `right`, stored as rows of
/// right-neighbours for every left vertex (and the transpose).
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteGraph {
    left: usize,
    right: usize,
    rows: Vec<BitSet>,
    cols: Vec<BitSet>,
    edge_count: usize,
}

impl std::fmt::Debug for BipartiteGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "BipartiteGraph({}+{}, edges={})",
            self.left, self.right, self.edge_count
        )
    }
}

impl BipartiteGraph {
    pub fn new(left: usize, right: usize) -> Self {
        BipartiteGraph {
            left,
            right,
            rows: vec![BitSet::new(right); left],
            cols: vec![BitSet::new(left); right],
            edge_count: 0,
        }
    }

    pub fn complete(left: usize, right: usize) -> Self {
        let mut b = BipartiteGraph::new(left, right);
        for a in 0..left {
            for c in 0..right {
                b.add_edge(a, c);
            }
        }
        b
    }

    pub fn from_edges<I: IntoIterator<Item = (usize, usize)>>(
        left: usize,
        right: usize,
        edges: I,
    ) -> Result<Self> {
        let mut b = BipartiteGraph::new(left, right);
        for (a, c) in edges {
            if a >= left || c >= right {
                return Err(Error::InvalidInput(format!(
                    "edge ({a},{c}) out of range for {left}+{right}"
                )));
            }
            b.add_edge(a, c);
        }
        Ok(b)
    }

    /// The 2k-cycle on `k + k` vertices: `i ~ i` and `i ~ i+1 (mod k)`.
    pub fn even_cycle(k: usize) -> Self {
        let mut b = BipartiteGraph::new(k, k);
        for i in 0..k {
            b.add_edge(i, i);
            b.add_edge(i, (i + 1) % k);
        }
        b
    }

    #[inline]
    pub fn left_size(&self) -> usize {
        self.left
    }

    #[inline]
    pub fn right_size(&self) -> usize {
        self.right
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.left && self.rows[a].contains(b)
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> bool {
        if self.rows[a].insert(b) {
            self.cols[b].insert(a);
            self.edge_count += 1;
            true
        } else {
            false
        }
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) -> bool {
        if self.rows[a].remove(b) {
            self.cols[b].remove(a);
            self.edge_count -= 1;
            true
        } else {
            false
        }
    }

    #[inline]
    pub fn row(&self, a: usize) -> &BitSet {
        &self.rows[a]
    }

    #[inline]
    pub fn col(&self, b: usize) -> &BitSet {
        &self.cols[b]
    }

    #[inline]
    pub fn left_degree(&self, a: usize) -> usize {
        self.rows[a].count()
    }

    #[inline]
    pub fn right_degree(&self, b: usize) -> usize {
        self.cols[b].count()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(a, row)| row.iter().map(move |b| (a, b)))
    }

    /// δ over both sides.
    pub fn min_degree(&self) -> usize {
        let l = (0..self.left).map(|a| self.left_degree(a));
        let r = (0..self.right).map(|b| self.right_degree(b));
        l.chain(r).min().unwrap_or(0)
    }

    /// Δ over both sides.
    pub fn max_degree(&self) -> usize {
        let l = (0..self.left).map(|a| self.left_degree(a));
        let r = (0..self.right).map(|b| self.right_degree(b));
        l.chain(r).max().unwrap_or(0)
    }

    pub fn is_regular(&self, r: usize) -> bool {
        self.left == self.right
            && (0..self.left).all(|a| self.left_degree(a) == r)
            && (0..self.right).all(|b| self.right_degree(b) == r)
    }

    /// Edges of `self` not in `other`.
    pub fn minus(&self, other: &BipartiteGraph) -> BipartiteGraph {
        let mut g = self.clone();
        for (a, b) in other.edges() {
            g.remove_edge(a, b);
        }
        g
    }

    pub fn union(&self, other: &BipartiteGraph) -> BipartiteGraph {
        let mut g = self.clone();
        for (a, b) in other.edges() {
            g.add_edge(a, b);
        }
        g
    }

    /// `e(X, Y)` with `X` on the left and `Y` on the right.
    pub fn edges_between(&self, x: &BitSet, y: &BitSet) -> usize {
        x.iter().map(|a| self.rows[a].intersection_count(y)).sum()
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidParameter(format!("probability {p} outside [0,1]")));
    }
    Ok(())
}

/// Samples `D(n, p)`: each of the `n(n-1)` arcs independently with probability `p`.
pub fn sample_dnp(n: usize, p: f64, seed: u64) -> Result<Digraph> {
    check_probability(p)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let mut rng = seed::rng(seed);
    let mut d = Digraph::empty(n);
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p) {
                d.add_arc(u, v);
            }
        }
    }
    Ok(d)
}

/// Samples from `D(F, p̄)`: keeps each arc `e` of `host` with probability `probs(e)`.
pub fn sample_sub<P>(host: &Digraph, probs: P, seed: u64) -> Result<Digraph>
where
    P: Fn(usize, usize) -> f64,
{
    let mut rng = seed::rng(seed);
    let mut d = Digraph::empty(host.n());
    for (u, v) in host.arcs() {
        let q = probs(u, v);
        check_probability(q)?;
        if rng.gen_bool(q) {
            d.add_arc(u, v);
        }
    }
    Ok(d)
}

/// Samples a bipartite graph with each of the `left·right` edges present with probability `p`.
pub fn sample_bipartite(left: usize, right: usize, p: f64, seed: u64) -> Result<BipartiteGraph> {
    check_probability(p)?;
    let mut rng = seed::rng(seed);
    let mut b = BipartiteGraph::new(left, right);
    for a in 0..left {
        for c in 0..right {
            if rng.gen_bool(p) {
                b.add_edge(a, c);
            }
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dnp_extremes() {
        let d = sample_dnp(4, 1.0, 99).unwrap();
        assert_eq!(d.edge_count(), 12);
        assert_eq!(d, Digraph::complete(4));
        assert_eq!(sample_dnp(4, 0.0, 99).unwrap().edge_count(), 0);
    }

    #[test]
    fn dnp_rejects_bad_probability() {
        assert!(matches!(sample_dnp(4, 1.5, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn edge_count_matches_degrees() {
        let d = sample_dnp(40, 0.3, 5).unwrap();
        let s: usize = (0..40).map(|v| d.out_degree(v)).sum();
        let t: usize = (0..40).map(|v| d.in_degree(v)).sum();
        assert_eq!(s, d.edge_count());
        assert_eq!(t, d.edge_count());
        assert!((0..40).all(|v| !d.has_arc(v, v)));
    }

    #[test]
    fn sub_sampler_extremes_and_errors() {
        let f = sample_dnp(12, 0.5, 1).unwrap();
        assert_eq!(sample_sub(&f, |_, _| 1.0, 3).unwrap(), f);
        assert_eq!(sample_sub(&f, |_, _| 0.0, 3).unwrap().edge_count(), 0);
        assert!(matches!(
            sample_sub(&f, |_, _| -0.1, 3),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn from_arcs_rejects_loops() {
        assert!(Digraph::from_arcs(3, [(1, 1)]).is_err());
        assert!(Digraph::from_arcs(3, [(1, 3)]).is_err());
    }

    #[test]
    fn bipartite_degrees() {
        let b = BipartiteGraph::even_cycle(3);
        assert!(b.is_regular(2));
        assert_eq!(b.edge_count(), 6);
        let k = BipartiteGraph::complete(3, 3);
        assert_eq!(k.minus(&b).edge_count(), 3);
    }
}
