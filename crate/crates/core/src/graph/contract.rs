use serde::{Deserialize, Serialize};

use super::{BipartiteGraph, Digraph, EdgeClass, PartitionScheme};
use crate::error::{Error, Result};

/// Ordered pairs `(wᵢ, xᵢ)`; contracted vertex `uᵢ` enters at `wᵢ` and leaves at `xᵢ`.
///
/// A pair with `w == x` stands for a single-vertex path.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairList {
    pub pairs: Vec<(usize, usize)>,
}

impl PairList {
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        PairList { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Vertex-disjoint directed paths, one per contracted vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathSystem {
    pub paths: Vec<Vec<usize>>,
}

impl PathSystem {
    pub fn new(paths: Vec<Vec<usize>>) -> Self {
        PathSystem { paths }
    }

    pub fn endpoints(&self) -> PairList {
        PairList::new(
            self.paths
                .iter()
                .map(|p| (p[0], *p.last().expect("empty path")))
                .collect(),
        )
    }

    /// Arcs along the paths.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.paths
            .iter()
            .flat_map(|p| p.windows(2).map(|w| (w[0], w[1])))
    }

    /// True when every path arc is present in `d`.
    pub fn arcs_in(&self, d: &Digraph) -> bool {
        self.arcs().all(|(u, v)| d.has_arc(u, v))
    }
}

/// A directed Hamilton cycle given as its cyclic vertex order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HamCycle {
    pub order: Vec<usize>,
}

impl HamCycle {
    pub fn new(order: Vec<usize>) -> Self {
        HamCycle { order }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Consecutive arcs including the wraparound arc.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let k = self.order.len();
        (0..k).map(move |i| (self.order[i], self.order[(i + 1) % k]))
    }

    /// Rotation starting at the smallest vertex.
    pub fn canonical(&self) -> HamCycle {
        let Some(pos) = self
            .order
            .iter()
            .enumerate()
            .min_by_key(|&(_, v)| *v)
            .map(|(i, _)| i)
        else {
            return self.clone();
        };
        let mut order = self.order[pos..].to_vec();
        order.extend_from_slice(&self.order[..pos]);
        HamCycle { order }
    }
}

/// Builds `D(M, V₀)`. Vertex `i < |V₀|` is `v0[i]`; vertex `|V₀| + i` is the
/// contracted pair `M[i]`. Loops `xᵢ → wᵢ` are dropped.
pub fn contract(d: &Digraph, pairs: &PairList, v0: &[usize]) -> Result<Digraph> {
    let n = d.n();
    let s = v0.len();
    let mut used = vec![false; n];
    for &v in v0 {
        if v >= n || std::mem::replace(&mut used[v], true) {
            return Err(Error::InvalidInput(format!("V0 vertex {v} repeated or out of range")));
        }
    }
    for &(w, x) in &pairs.pairs {
        if w >= n || x >= n {
            return Err(Error::InvalidInput(format!("pair ({w},{x}) out of range")));
        }
        if std::mem::replace(&mut used[w], true) {
            return Err(Error::InvalidInput(format!("endpoint {w} overlaps another pair or V0")));
        }
        if w != x && std::mem::replace(&mut used[x], true) {
            return Err(Error::InvalidInput(format!("endpoint {x} overlaps another pair or V0")));
        }
    }

    let k = s + pairs.len();
    // entry/exit vertex in D of each contracted vertex
    let entry: Vec<usize> = v0.iter().copied().chain(pairs.pairs.iter().map(|p| p.0)).collect();
    let exit: Vec<usize> = v0.iter().copied().chain(pairs.pairs.iter().map(|p| p.1)).collect();
    let mut label = vec![usize::MAX; n];
    for (i, &w) in entry.iter().enumerate() {
        label[w] = i;
    }
    let mut c = Digraph::empty(k);
    for (a, &x) in exit.iter().enumerate() {
        for w in d.out_row(x).iter() {
            let b = label[w];
            if b != usize::MAX && b != a {
                c.add_arc(a, b);
            }
        }
    }
    Ok(c)
}

/// Expands a Hamilton cycle of `contract(D, system.endpoints(), v0)` into
/// a cycle of `D` by splicing each path in place of its contracted vertex.
pub fn lift_cycle(contracted: &HamCycle, system: &PathSystem, v0: &[usize]) -> Result<HamCycle> {
    let s = v0.len();
    let k = s + system.paths.len();
    if contracted.len() != k {
        return Err(Error::InternalInvariant(format!(
            "contracted cycle has length {} but the contracted graph has {k} vertices",
            contracted.len()
        )));
    }
    let mut order = Vec::with_capacity(s + system.paths.iter().map(Vec::len).sum::<usize>());
    for &c in &contracted.order {
        if c < s {
            order.push(v0[c]);
        } else if c < k {
            order.extend_from_slice(&system.paths[c - s]);
        } else {
            return Err(Error::InternalInvariant(format!("contracted label {c} out of range")));
        }
    }
    Ok(HamCycle { order })
}

/// True iff `c` visits every vertex of `d` exactly once along arcs of `d`.
pub fn verify_cycle(d: &Digraph, c: &HamCycle) -> bool {
    let n = d.n();
    if n < 2 || c.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &v in &c.order {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return false;
        }
    }
    c.arcs().all(|(u, v)| d.has_arc(u, v))
}

/// True iff `p` is a matching path system for `v`: `m` disjoint paths covering
/// `V₁ ∪ … ∪ V_ℓ`, each running `V₁ → V₂ → … → V_ℓ`.
pub fn verify_system(v: &PartitionScheme, p: &PathSystem) -> bool {
    if p.paths.len() != v.m() {
        return false;
    }
    let mut seen = vec![false; v.n()];
    for path in &p.paths {
        if path.len() != v.ell() {
            return false;
        }
        for (j, &x) in path.iter().enumerate() {
            if x >= v.n() || v.block_index(x) != j + 1 || std::mem::replace(&mut seen[x], true) {
                return false;
            }
        }
        if path
            .windows(2)
            .any(|w| super::classify_edge(v, w[0], w[1]) != EdgeClass::Interior)
        {
            return false;
        }
    }
    true
}

/// The arcs `V_j → V_{j+1}` of `d` as a bipartite graph on block-local indices.
pub fn layer_bipartite(d: &Digraph, v: &PartitionScheme, j: usize) -> BipartiteGraph {
    assert!(j >= 1 && j < v.ell(), "layer {j} out of range");
    let (a, b) = (v.block(j), v.block(j + 1));
    let mut pos = vec![usize::MAX; d.n()];
    for (i, &x) in b.iter().enumerate() {
        pos[x] = i;
    }
    let mut g = BipartiteGraph::new(a.len(), b.len());
    for (i, &x) in a.iter().enumerate() {
        for y in d.out_row(x).iter() {
            if pos[y] != usize::MAX {
                g.add_edge(i, pos[y]);
            }
        }
    }
    g
}

/// Chains one perfect matching per layer into a path system. `mates[j-1][a]`
/// is the block-local index in `V_{j+1}` matched to the `a`-th vertex of `V_j`.
pub fn path_system_from_matchings(v: &PartitionScheme, mates: &[Vec<usize>]) -> Result<PathSystem> {
    let (ell, m) = (v.ell(), v.m());
    if mates.len() != ell - 1 {
        return Err(Error::InvalidInput(format!(
            "expected {} layer matchings, got {}",
            ell - 1,
            mates.len()
        )));
    }
    for mt in mates {
        let mut hit = vec![false; m];
        if mt.len() != m || mt.iter().any(|&b| b >= m || std::mem::replace(&mut hit[b], true)) {
            return Err(Error::InvalidInput("layer matching is not perfect".into()));
        }
    }
    let paths = (0..m)
        .map(|start| {
            let mut idx = start;
            let mut path = Vec::with_capacity(ell);
            path.push(v.block(1)[idx]);
            for (j, mt) in mates.iter().enumerate() {
                idx = mt[idx];
                path.push(v.block(j + 2)[idx]);
            }
            path
        })
        .collect();
    Ok(PathSystem { paths })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_pairs_gives_induced_subgraph() {
        let d = Digraph::from_arcs(4, [(0, 1), (1, 2), (2, 0), (3, 0)]).unwrap();
        let c = contract(&d, &PairList::default(), &[0, 1, 2]).unwrap();
        assert_eq!(c.n(), 3);
        assert_eq!(c.edge_count(), 3);
    }

    #[test]
    fn pair_arcs_and_loops() {
        // V0 = {0}; pairs u1 = (1,2), u2 = (3,4)
        let d = Digraph::from_arcs(5, [(2, 3), (2, 1), (0, 1), (4, 0)]).unwrap();
        let pairs = PairList::new(vec![(1, 2), (3, 4)]);
        let c = contract(&d, &pairs, &[0]).unwrap();
        assert_eq!(c.n(), 3);
        assert!(c.has_arc(1, 2)); // x1 → w2
        assert!(c.has_arc(0, 1)); // v → w1
        assert!(c.has_arc(2, 0)); // x2 → v
        assert_eq!(c.edge_count(), 3); // x1 → w1 dropped
    }

    #[test]
    fn overlapping_pairs_rejected() {
        let d = Digraph::complete(4);
        let bad = PairList::new(vec![(1, 2), (2, 3)]);
        assert!(matches!(contract(&d, &bad, &[0]), Err(Error::InvalidInput(_))));
        let bad = PairList::new(vec![(0, 2)]);
        assert!(matches!(contract(&d, &bad, &[0]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn lift_forced_example() {
        let d = Digraph::from_arcs(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let sys = PathSystem::new(vec![vec![1, 2]]);
        let c = contract(&d, &sys.endpoints(), &[0]).unwrap();
        let cyc = HamCycle::new(vec![0, 1]);
        assert!(verify_cycle(&c, &cyc));
        let lifted = lift_cycle(&cyc, &sys, &[0]).unwrap();
        assert_eq!(lifted.order, vec![0, 1, 2]);
        assert!(verify_cycle(&d, &lifted));
    }

    #[test]
    fn lift_length_mismatch() {
        let sys = PathSystem::new(vec![vec![1, 2]]);
        let err = lift_cycle(&HamCycle::new(vec![0, 1, 2]), &sys, &[0]);
        assert!(matches!(err, Err(Error::InternalInvariant(_))));
    }

    #[test]
    fn verify_cycle_basics() {
        let k = Digraph::complete(5);
        assert!(verify_cycle(&k, &HamCycle::new(vec![3, 1, 4, 0, 2])));
        assert!(!verify_cycle(&Digraph::empty(5), &HamCycle::new(vec![0, 1, 2, 3, 4])));
        assert!(!verify_cycle(&k, &HamCycle::new(vec![0, 1, 2, 3, 3])));
    }

    #[test]
    fn canonical_rotation() {
        let c = HamCycle::new(vec![3, 4, 0, 1]);
        assert_eq!(c.canonical().order, vec![0, 1, 3, 4]);
    }
}
