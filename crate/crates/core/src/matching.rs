//! Bipartite matchings: Hopcroft–Karp, families of edge-disjoint perfect
//! matchings, regular factors, and exact perfect-matching counts.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow;
use crate::graph::BipartiteGraph;
use crate::seed;

const NONE: usize = usize::MAX;

/// A partial injection from left vertices to right vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    left_size: usize,
    right_size: usize,
    mate: Vec<usize>,
}

impl Matching {
    pub fn empty(left_size: usize, right_size: usize) -> Self {
        Matching {
            left_size,
            right_size,
            mate: vec![NONE; left_size],
        }
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(
        left_size: usize,
        right_size: usize,
        pairs: I,
    ) -> Result<Self> {
        let mut m = Matching::empty(left_size, right_size);
        let mut used = vec![false; right_size];
        for (a, b) in pairs {
            if a >= left_size || b >= right_size {
                return Err(Error::InvalidInput(format!("pair ({a},{b}) out of range")));
            }
            if m.mate[a] != NONE || std::mem::replace(&mut used[b], true) {
                return Err(Error::InvalidInput(format!("pair ({a},{b}) is not injective")));
            }
            m.mate[a] = b;
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.mate.iter().filter(|&&b| b != NONE).count()
    }

    pub fn mate(&self, a: usize) -> Option<usize> {
        match self.mate[a] {
            NONE => None,
            b => Some(b),
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.mate
            .iter()
            .enumerate()
            .filter(|&(_, &b)| b != NONE)
            .map(|(a, &b)| (a, b))
    }

    pub fn is_perfect(&self) -> bool {
        self.left_size == self.right_size && self.size() == self.left_size
    }

    /// Mate array of a perfect matching.
    pub fn as_permutation(&self) -> Option<&[usize]> {
        self.is_perfect().then_some(&self.mate[..])
    }

    /// Injective and every pair is an edge of `b`.
    pub fn is_valid_in(&self, b: &BipartiteGraph) -> bool {
        if self.left_size != b.left_size() || self.right_size != b.right_size() {
            return false;
        }
        let mut used = vec![false; self.right_size];
        self.pairs()
            .all(|(x, y)| b.has_edge(x, y) && !std::mem::replace(&mut used[y], true))
    }
}

/// An ordered list of pairwise edge-disjoint perfect matchings of one host.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingFamily {
    pub n: usize,
    pub matchings: Vec<Matching>,
}

impl MatchingFamily {
    pub fn new(n: usize) -> Self {
        MatchingFamily {
            n,
            matchings: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.matchings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matchings.is_empty()
    }

    /// Every matching is a perfect matching of `host` and no edge is used twice.
    pub fn is_valid_in(&self, host: &BipartiteGraph) -> bool {
        let mut used = BipartiteGraph::new(self.n, self.n);
        self.matchings.iter().all(|m| {
            m.is_perfect()
                && m.left_size == self.n
                && m.is_valid_in(host)
                && m.pairs().all(|(a, b)| used.add_edge(a, b))
        })
    }

    /// Union of the matchings as a graph.
    pub fn union_graph(&self) -> BipartiteGraph {
        let mut g = BipartiteGraph::new(self.n, self.n);
        for m in &self.matchings {
            for (a, b) in m.pairs() {
                g.add_edge(a, b);
            }
        }
        g
    }

    /// One line per matching: `matching k: a-b a-b …`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, m) in self.matchings.iter().enumerate() {
            out.push_str(&format!("matching {k}:"));
            for (a, b) in m.pairs() {
                out.push_str(&format!(" {a}-{b}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(n: usize, text: &str) -> Result<Self> {
        let mut fam = MatchingFamily::new(n);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let perr = |msg: &str| Error::Parse {
                line: i + 1,
                msg: msg.to_string(),
            };
            let rest = line
                .strip_prefix("matching ")
                .ok_or_else(|| perr("expected `matching k:`"))?;
            let (_, pairs) = rest.split_once(':').ok_or_else(|| perr("missing `:`"))?;
            let mut v = Vec::new();
            for tok in pairs.split_whitespace() {
                let (a, b) = tok.split_once('-').ok_or_else(|| perr("expected a-b"))?;
                let a = a.parse().map_err(|_| perr("bad left vertex"))?;
                let b = b.parse().map_err(|_| perr("bad right vertex"))?;
                v.push((a, b));
            }
            fam.matchings
                .push(Matching::from_pairs(n, n, v).map_err(|e| perr(&e.to_string()))?);
        }
        Ok(fam)
    }
}

struct HopcroftKarp<'a> {
    g: &'a BipartiteGraph,
    mate_l: Vec<usize>,
    mate_r: Vec<usize>,
    dist: Vec<u32>,
}

impl HopcroftKarp<'_> {
    fn bfs(&mut self) -> bool {
        let inf = u32::MAX;
        let mut queue = std::collections::VecDeque::new();
        for a in 0..self.g.left_size() {
            if self.mate_l[a] == NONE {
                self.dist[a] = 0;
                queue.push_back(a);
            } else {
                self.dist[a] = inf;
            }
        }
        let mut found = false;
        while let Some(a) = queue.pop_front() {
            for b in self.g.row(a).iter() {
                let a2 = self.mate_r[b];
                if a2 == NONE {
                    found = true;
                } else if self.dist[a2] == inf {
                    self.dist[a2] = self.dist[a] + 1;
                    queue.push_back(a2);
                }
            }
        }
        found
    }

    fn dfs(&mut self, a: usize) -> bool {
        let row = self.g.row(a);
        for b in row.iter() {
            let a2 = self.mate_r[b];
            if a2 == NONE || (self.dist[a2] == self.dist[a] + 1 && self.dfs(a2)) {
                self.mate_l[a] = b;
                self.mate_r[b] = a;
                return true;
            }
        }
        self.dist[a] = u32::MAX;
        false
    }
}

/// Maximum matching, starting from `warm` if given (pairs not in `g` are dropped).
pub fn max_matching_from(g: &BipartiteGraph, warm: Option<&Matching>) -> Matching {
    let mut hk = HopcroftKarp {
        g,
        mate_l: vec![NONE; g.left_size()],
        mate_r: vec![NONE; g.right_size()],
        dist: vec![0; g.left_size()],
    };
    if let Some(w) = warm {
        for (a, b) in w.pairs() {
            if a < g.left_size() && g.has_edge(a, b) && hk.mate_r[b] == NONE {
                hk.mate_l[a] = b;
                hk.mate_r[b] = a;
            }
        }
    }
    while hk.bfs() {
        for a in 0..g.left_size() {
            if hk.mate_l[a] == NONE {
                hk.dfs(a);
            }
        }
    }
    Matching {
        left_size: g.left_size(),
        right_size: g.right_size(),
        mate: hk.mate_l,
    }
}

/// Maximum-cardinality matching (Hopcroft–Karp).
pub fn max_matching(g: &BipartiteGraph) -> Matching {
    max_matching_from(g, None)
}

/// Greedily peels perfect matchings off `g` until `target` are found or no
/// perfect matching remains. A short family is a valid result.
pub fn extract_disjoint_pms(g: &BipartiteGraph, target: usize) -> MatchingFamily {
    let n = g.left_size();
    let mut fam = MatchingFamily::new(n);
    if n != g.right_size() {
        return fam;
    }
    let mut rest = g.clone();
    while fam.len() < target {
        let m = max_matching(&rest);
        if !m.is_perfect() {
            break;
        }
        for (a, b) in m.pairs() {
            rest.remove_edge(a, b);
        }
        fam.matchings.push(m);
    }
    fam
}

/// Largest `r` such that `g` has an `r`-regular spanning subgraph, together
/// with one such subgraph. Equals the largest number of edge-disjoint perfect
/// matchings of `g`.
pub fn max_regular_factor(g: &BipartiteGraph) -> Result<(usize, BipartiteGraph)> {
    let n = g.left_size();
    if g.right_size() != n {
        return Err(Error::InvalidInput("regular factors need equal sides".into()));
    }
    let empty = BipartiteGraph::new(n, n);
    let (mut lo, mut hi) = (0usize, g.min_degree());
    let mut best = empty.clone();
    // invariant: lo is feasible, anything above hi is not
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        let cf = flow::completion_flow(g, &empty, mid)?;
        if cf.achieved == cf.required {
            lo = mid;
            best = cf.g_prime;
        } else {
            hi = mid - 1;
        }
    }
    Ok((lo, best))
}

/// Edge-disjoint perfect matchings of maximum number, via the largest regular factor.
pub fn max_disjoint_pms(g: &BipartiteGraph) -> Result<MatchingFamily> {
    let (r, f) = max_regular_factor(g)?;
    hall_decompose(&f, r)
}

/// Answer of the Gale–Ryser test, with a violating pair when infeasible.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaleRyser {
    pub feasible: bool,
    /// `(X, Y)` with `e(X, Y) < r(|X| + |Y| - N)`, taken from a minimum cut.
    pub witness: Option<(Vec<usize>, Vec<usize>)>,
}

/// Decides whether `g` has an `r`-regular spanning subgraph by max-flow.
pub fn gale_ryser_feasible(g: &BipartiteGraph, r: usize) -> Result<GaleRyser> {
    let n = g.left_size();
    if g.right_size() != n {
        return Err(Error::InvalidInput("Gale–Ryser test needs equal sides".into()));
    }
    if r > n {
        return Err(Error::InvalidParameter(format!("r = {r} exceeds N = {n}")));
    }
    let cf = flow::completion_flow(g, &BipartiteGraph::new(n, n), r)?;
    if cf.achieved == cf.required {
        Ok(GaleRyser {
            feasible: true,
            witness: None,
        })
    } else {
        Ok(GaleRyser {
            feasible: false,
            witness: Some((cf.a_s, cf.b_t)),
        })
    }
}

/// Splits an `r`-regular bipartite graph into `r` disjoint perfect matchings.
pub fn hall_decompose(g: &BipartiteGraph, r: usize) -> Result<MatchingFamily> {
    if !g.is_regular(r) {
        return Err(Error::InvalidInput(format!("graph is not {r}-regular")));
    }
    let n = g.left_size();
    let mut fam = MatchingFamily::new(n);
    let mut rest = g.clone();
    for _ in 0..r {
        let m = max_matching(&rest);
        if !m.is_perfect() {
            return Err(Error::InternalInvariant(
                "regular bipartite graph without a perfect matching".into(),
            ));
        }
        for (a, b) in m.pairs() {
            rest.remove_edge(a, b);
        }
        fam.matchings.push(m);
    }
    Ok(fam)
}

/// Largest side for which [`count_pms`] runs.
pub const PERMANENT_LIMIT: usize = 30;

/// Number of perfect matchings (the permanent of the biadjacency matrix),
/// by Ryser's formula over Gray-code column subsets.
///
/// Arithmetic is modulo 2¹²⁸. The permanent of a 0/1 matrix of side 30 is at
/// most 30! < 2¹²⁸, so the residue is the exact value.
pub fn count_pms(g: &BipartiteGraph) -> Result<u128> {
    let n = g.left_size();
    if g.right_size() != n {
        return Err(Error::InvalidInput("permanent needs equal sides".into()));
    }
    if n > PERMANENT_LIMIT {
        return Err(Error::SizeLimit {
            what: "permanent side",
            limit: PERMANENT_LIMIT,
            got: n,
        });
    }
    if n == 0 {
        return Ok(1);
    }
    if (0..n).any(|a| g.left_degree(a) == 0) {
        return Ok(0);
    }
    // column j as a mask over rows
    let cols: Vec<u32> = (0..n)
        .map(|b| g.col(b).iter().fold(0u32, |acc, a| acc | (1 << a)))
        .collect();
    let total: u64 = 1 << n;
    let chunks: u64 = if n >= 16 { 1 << 8 } else { 1 };
    let per = total / chunks;
    let sum = (0..chunks)
        .into_par_iter()
        .map(|c| ryser_range(&cols, n, c * per, (c + 1) * per))
        .reduce(|| 0u128, u128::wrapping_add);
    // Σ_S (-1)^{n-|S|} Π_i rowsum_S(i); the terms above carry (-1)^{|S|}
    Ok(if n.is_multiple_of(2) { sum } else { sum.wrapping_neg() })
}

fn ryser_range(cols: &[u32], n: usize, from: u64, to: u64) -> u128 {
    let gray = |k: u64| k ^ (k >> 1);
    let mut sums = vec![0i64; n];
    let g0 = gray(from);
    for (j, &col) in cols.iter().enumerate() {
        if g0 >> j & 1 == 1 {
            for (i, s) in sums.iter_mut().enumerate() {
                *s += i64::from(col >> i & 1);
            }
        }
    }
    let mut acc = 0u128;
    let mut term = |sums: &[i64], subset: u64| {
        let mut prod = 1u128;
        for &s in sums {
            if s == 0 {
                return;
            }
            prod = prod.wrapping_mul(s as u128);
        }
        if subset.count_ones().is_multiple_of(2) {
            acc = acc.wrapping_add(prod);
        } else {
            acc = acc.wrapping_sub(prod);
        }
    };
    term(&sums, g0);
    for k in from + 1..to {
        let j = k.trailing_zeros() as usize;
        let gk = gray(k);
        let col = cols[j];
        let sign = if gk >> j & 1 == 1 { 1 } else { -1 };
        for (i, s) in sums.iter_mut().enumerate() {
            *s += sign * i64::from(col >> i & 1);
        }
        term(&sums, gk);
    }
    acc
}

/// `ln N!`.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `ln((r/N)^N · N!)`, the lower bound on perfect matchings of an
/// `r`-regular bipartite graph with sides `N`.
pub fn vdw_bound(n: usize, r: usize) -> Result<f64> {
    if r == 0 || r > n {
        return Err(Error::InvalidParameter(format!("need 1 ≤ r ≤ N, got r={r}, N={n}")));
    }
    Ok(n as f64 * (r as f64 / n as f64).ln() + ln_factorial(n))
}

/// A random simple `r`-regular bipartite graph on `n + n` vertices formed by
/// overlaying `r` random permutations; a permutation that would repeat an
/// edge is redrawn, and after many failures a random perfect matching of the
/// complement is used instead.
pub fn random_regular_bipartite(n: usize, r: usize, seed: u64) -> Result<BipartiteGraph> {
    if r > n {
        return Err(Error::InvalidParameter(format!("r = {r} exceeds N = {n}")));
    }
    let mut rng = seed::rng(seed);
    let mut g = BipartiteGraph::new(n, n);
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..r {
        let mut placed = false;
        for _ in 0..200 {
            perm.shuffle(&mut rng);
            if perm.iter().enumerate().all(|(a, &b)| !g.has_edge(a, b)) {
                for (a, &b) in perm.iter().enumerate() {
                    g.add_edge(a, b);
                }
                placed = true;
                break;
            }
        }
        if !placed {
            // complement of a k-regular graph is (n-k)-regular and has a perfect matching;
            // shuffle labels so the matching found is not biased toward low indices
            let mut lp: Vec<usize> = (0..n).collect();
            let mut rp: Vec<usize> = (0..n).collect();
            lp.shuffle(&mut rng);
            rp.shuffle(&mut rng);
            let mut comp = BipartiteGraph::new(n, n);
            for (a, &la) in lp.iter().enumerate() {
                for (b, &rb) in rp.iter().enumerate() {
                    if !g.has_edge(la, rb) {
                        comp.add_edge(a, b);
                    }
                }
            }
            let m = max_matching(&comp);
            if !m.is_perfect() {
                return Err(Error::InternalInvariant("regular complement without a perfect matching".into()));
            }
            for (a, b) in m.pairs() {
                g.add_edge(lp[a], rp[b]);
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hk_basics() {
        assert!(max_matching(&BipartiteGraph::complete(7, 7)).is_perfect());
        assert_eq!(max_matching(&BipartiteGraph::new(4, 4)).size(), 0);
        assert_eq!(max_matching(&BipartiteGraph::even_cycle(3)).size(), 3);
    }

    #[test]
    fn extract_on_regular() {
        let fam = extract_disjoint_pms(&BipartiteGraph::complete(6, 6), 6);
        assert_eq!(fam.len(), 6);
        assert!(fam.is_valid_in(&BipartiteGraph::complete(6, 6)));
        let c = BipartiteGraph::even_cycle(5);
        assert_eq!(extract_disjoint_pms(&c, 2).len(), 2);
    }

    #[test]
    fn gale_ryser_examples() {
        assert!(gale_ryser_feasible(&BipartiteGraph::complete(4, 4), 4).unwrap().feasible);
        let pm = BipartiteGraph::from_edges(3, 3, [(0, 0), (1, 1), (2, 2)]).unwrap();
        let gr = gale_ryser_feasible(&pm, 2).unwrap();
        assert!(!gr.feasible);
        let (x, y) = gr.witness.unwrap();
        let xs = crate::bitset::BitSet::from_iter_with_len(3, x.iter().copied());
        let ys = crate::bitset::BitSet::from_iter_with_len(3, y.iter().copied());
        assert!((pm.edges_between(&xs, &ys) as i64) < 2 * (x.len() as i64 + y.len() as i64 - 3));
        assert!(gale_ryser_feasible(&BipartiteGraph::even_cycle(3), 1).unwrap().feasible);
    }

    #[test]
    fn hall_examples() {
        let fam = hall_decompose(&BipartiteGraph::complete(3, 3), 3).unwrap();
        assert_eq!(fam.union_graph(), BipartiteGraph::complete(3, 3));
        let c = BipartiteGraph::even_cycle(4);
        assert_eq!(hall_decompose(&c, 2).unwrap().union_graph(), c);
        assert!(matches!(hall_decompose(&c, 3), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn permanent_small() {
        assert_eq!(count_pms(&BipartiteGraph::complete(3, 3)).unwrap(), 6);
        assert_eq!(count_pms(&BipartiteGraph::even_cycle(3)).unwrap(), 2);
        assert_eq!(count_pms(&BipartiteGraph::complete(10, 10)).unwrap(), 3_628_800);
        assert!(matches!(
            count_pms(&BipartiteGraph::new(31, 31)),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn permanent_of_complete_20_chunks() {
        let f20: u128 = (1..=20u128).product();
        assert_eq!(count_pms(&BipartiteGraph::complete(20, 20)).unwrap(), f20);
    }

    #[test]
    fn vdw_examples() {
        assert!((vdw_bound(3, 3).unwrap() - 6f64.ln()).abs() < 1e-12);
        assert!((vdw_bound(3, 2).unwrap() - (48.0f64 / 27.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn regular_sampler() {
        for (n, r) in [(12, 5), (6, 6), (10, 9)] {
            assert!(random_regular_bipartite(n, r, 3).unwrap().is_regular(r));
        }
    }

    #[test]
    fn family_text_roundtrip() {
        let fam = hall_decompose(&BipartiteGraph::complete(4, 4), 4).unwrap();
        assert_eq!(MatchingFamily::from_text(4, &fam.to_text()).unwrap(), fam);
    }
}
