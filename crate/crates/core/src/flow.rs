//! Integral max-flow (Dinic) and completion of a bipartite graph to an
//! `r`-regular one using edges of a host graph.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::seed;

/// A directed network with integral capacities.
#[derive(Clone, Debug)]
pub struct FlowNetwork {
    nodes: usize,
    source: usize,
    sink: usize,
    arcs: Vec<(usize, usize, u64)>,
}

impl FlowNetwork {
    pub fn new(nodes: usize, source: usize, sink: usize) -> Result<Self> {
        if source >= nodes || sink >= nodes || source == sink {
            return Err(Error::InvalidParameter(format!(
                "bad source/sink ({source},{sink}) for {nodes} nodes"
            )));
        }
        Ok(FlowNetwork {
            nodes,
            source,
            sink,
            arcs: Vec::new(),
        })
    }

    /// Adds `u → v` with capacity `cap` and returns its index.
    pub fn add_arc(&mut self, u: usize, v: usize, cap: u64) -> Result<usize> {
        if u >= self.nodes || v >= self.nodes {
            return Err(Error::InvalidParameter(format!("arc ({u},{v}) out of range")));
        }
        if v == self.source || u == self.sink {
            return Err(Error::InvalidParameter("no arcs into the source or out of the sink".into()));
        }
        self.arcs.push((u, v, cap));
        Ok(self.arcs.len() - 1)
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn arcs(&self) -> &[(usize, usize, u64)] {
        &self.arcs
    }
}

#[derive(Clone, Debug)]
pub struct FlowResult {
    pub value: u64,
    /// Flow on each arc, indexed as returned by [`FlowNetwork::add_arc`].
    pub flows: Vec<u64>,
    /// Nodes reachable from the source in the final residual network; the
    /// arcs leaving this set form a minimum cut.
    pub source_side: BitSet,
}

struct Dinic {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u64>,
    level: Vec<i32>,
    it: Vec<usize>,
}

impl Dinic {
    fn new(net: &FlowNetwork) -> Self {
        let mut d = Dinic {
            head: vec![Vec::new(); net.nodes],
            to: Vec::with_capacity(2 * net.arcs.len()),
            cap: Vec::with_capacity(2 * net.arcs.len()),
            level: vec![0; net.nodes],
            it: vec![0; net.nodes],
        };
        for &(u, v, c) in &net.arcs {
            d.head[u].push(d.to.len());
            d.to.push(v);
            d.cap.push(c);
            d.head[v].push(d.to.len());
            d.to.push(u);
            d.cap.push(0);
        }
        d
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        let mut queue = std::collections::VecDeque::new();
        self.level[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if self.cap[e] > 0 && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: u64) -> u64 {
        if u == t {
            return pushed;
        }
        while self.it[u] < self.head[u].len() {
            let e = self.head[u][self.it[u]];
            let v = self.to[e];
            if self.cap[e] > 0 && self.level[v] == self.level[u] + 1 {
                let got = self.dfs(v, t, pushed.min(self.cap[e]));
                if got > 0 {
                    self.cap[e] -= got;
                    self.cap[e ^ 1] += got;
                    return got;
                }
            }
            self.it[u] += 1;
        }
        0
    }
}

/// Maximum `s`–`t` flow.
pub fn max_flow(net: &FlowNetwork) -> FlowResult {
    let mut d = Dinic::new(net);
    let (s, t) = (net.source, net.sink);
    let mut value = 0u64;
    while d.bfs(s, t) {
        d.it.iter_mut().for_each(|i| *i = 0);
        loop {
            let f = d.dfs(s, t, u64::MAX);
            if f == 0 {
                break;
            }
            value += f;
        }
    }
    // after the last failed BFS, `level >= 0` marks the residual-reachable side
    let source_side = BitSet::from_iter_with_len(
        net.nodes,
        (0..net.nodes).filter(|&v| d.level[v] >= 0),
    );
    let flows = net
        .arcs
        .iter()
        .enumerate()
        .map(|(i, &(_, _, c))| c - d.cap[2 * i])
        .collect();
    FlowResult {
        value,
        flows,
        source_side,
    }
}

/// Host `G`, pre-placed edges `H` and target degree `r` for an `r`-factor completion.
#[derive(Clone, Debug)]
pub struct RFactorInstance {
    pub g: BipartiteGraph,
    pub h: BipartiteGraph,
    pub r: usize,
}

/// Outcome of the completion flow, feasible or not.
#[derive(Clone, Debug)]
pub(crate) struct CompletionFlow {
    pub achieved: u64,
    pub required: u64,
    pub g_prime: BipartiteGraph,
    /// Left vertices on the source side of the min cut.
    pub a_s: Vec<usize>,
    /// Right vertices on the sink side of the min cut.
    pub b_t: Vec<usize>,
}

pub(crate) fn completion_flow(g: &BipartiteGraph, h: &BipartiteGraph, r: usize) -> Result<CompletionFlow> {
    let n = g.left_size();
    if g.right_size() != n || h.left_size() != n || h.right_size() != n {
        return Err(Error::InvalidInput("G and H must both be N+N bipartite graphs".into()));
    }
    if h.max_degree() > r {
        return Err(Error::InvalidParameter(format!(
            "Δ(H) = {} exceeds r = {r}",
            h.max_degree()
        )));
    }
    // nodes: source 0, left 1..=n, right n+1..=2n, sink 2n+1
    let (s, t) = (0, 2 * n + 1);
    let mut net = FlowNetwork::new(2 * n + 2, s, t)?;
    let mut required = 0u64;
    for a in 0..n {
        let c = (r - h.left_degree(a)) as u64;
        required += c;
        net.add_arc(s, 1 + a, c)?;
    }
    for b in 0..n {
        net.add_arc(1 + n + b, t, (r - h.right_degree(b)) as u64)?;
    }
    let mut edge_arcs = Vec::new();
    for (a, b) in g.edges() {
        if !h.has_edge(a, b) {
            edge_arcs.push((a, b, net.add_arc(1 + a, 1 + n + b, 1)?));
        }
    }
    let res = max_flow(&net);
    let mut g_prime = BipartiteGraph::new(n, n);
    for (a, b, idx) in edge_arcs {
        if res.flows[idx] == 1 {
            g_prime.add_edge(a, b);
        }
    }
    Ok(CompletionFlow {
        achieved: res.value,
        required,
        g_prime,
        a_s: (0..n).filter(|&a| res.source_side.contains(1 + a)).collect(),
        b_t: (0..n).filter(|&b| !res.source_side.contains(1 + n + b)).collect(),
    })
}

/// Finds `G' ⊆ G \ H` with `d_{G'}(v) + d_H(v) = r` for every vertex.
///
/// Any instance with `Δ(H) ≤ r` is accepted; the `Δ(H) ≤ r/2` bound and the
/// expansion conditions are sufficient, not necessary. When no such `G'`
/// exists, returns [`Error::Infeasible`] with the achieved flow value.
pub fn complete_to_r_factor(inst: &RFactorInstance) -> Result<BipartiteGraph> {
    let cf = completion_flow(&inst.g, &inst.h, inst.r)?;
    if cf.achieved < cf.required {
        return Err(Error::Infeasible {
            achieved: cf.achieved,
            required: cf.required,
        });
    }
    Ok(cf.g_prime)
}

/// Constants in the expansion hypotheses of the completion lemma.
pub mod constants {
    /// Large sets are those of size at least `N / LARGE_SET_DIVISOR`.
    pub const LARGE_SET_DIVISOR: f64 = 4.0;
    /// Large sets must span at least `dN / LARGE_SET_EDGE_DIVISOR` edges.
    pub const LARGE_SET_EDGE_DIVISOR: f64 = 40.0;
    /// Fraction of `d|X|` that forces a small set to expand.
    pub const DENSE_FRACTION: f64 = 0.75;
    pub const EXPANSION_FACTOR: usize = 2;
    /// `r ≤ d / R_DIVISOR` in the lemma.
    pub const R_DIVISOR: f64 = 80.0;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExpansionCondition {
    MinDegree,
    LargeSets,
    LeftExpansion,
    RightExpansion,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpansionViolation {
    pub condition: ExpansionCondition,
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub edges: usize,
    pub threshold: f64,
}

/// Result of a randomized search for violations. An empty `violations`
/// list only says none were found in `trials` samples.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub trials: usize,
    pub violations: Vec<ExpansionViolation>,
}

impl ExpansionReport {
    pub fn no_violation_found(&self) -> bool {
        self.violations.is_empty()
    }
}

/// The `k` vertices of `pool` with the smallest (or largest) count, ties by label.
fn extreme_k(counts: &[usize], k: usize, largest: bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..counts.len()).collect();
    if largest {
        idx.sort_by_key(|&i| std::cmp::Reverse(counts[i]));
    } else {
        idx.sort_by_key(|&i| counts[i]);
    }
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

fn stratified_size<R: rand::Rng>(rng: &mut R, lo: usize, hi: usize, anchor: usize) -> usize {
    // half the samples sit close to the threshold, the rest are spread out
    if lo >= hi {
        return lo;
    }
    if rng.gen_bool(0.5) {
        let span = ((hi - lo) / 8).max(1);
        let off = rng.gen_range(0..=span);
        if anchor == lo {
            (lo + off).min(hi)
        } else {
            hi.saturating_sub(off).max(lo)
        }
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Randomized search for pairs `(X, Y)` violating the expansion hypotheses
/// of the completion lemma with minimum degree `d`. For each sampled `X` the
/// worst `Y` of the relevant size is computed exactly from degrees into `X`.
pub fn check_expansion_hypothesis(
    g: &BipartiteGraph,
    d: usize,
    sample_budget: usize,
    seed: u64,
) -> ExpansionReport {
    use constants::*;
    let n = g.left_size().min(g.right_size());
    let mut violations = Vec::new();
    let mut rng = seed::rng(seed);

    if let Some(v) = (0..g.left_size())
        .map(|a| (g.left_degree(a), a, true))
        .chain((0..g.right_size()).map(|b| (g.right_degree(b), b, false)))
        .find(|&(deg, _, _)| deg < d)
    {
        let (x, y) = if v.2 { (vec![v.1], vec![]) } else { (vec![], vec![v.1]) };
        violations.push(ExpansionViolation {
            condition: ExpansionCondition::MinDegree,
            x,
            y,
            edges: v.0,
            threshold: d as f64,
        });
        return ExpansionReport {
            trials: 0,
            violations,
        };
    }
    if n == 0 {
        return ExpansionReport {
            trials: 0,
            violations,
        };
    }

    let quarter = (n as f64 / LARGE_SET_DIVISOR).ceil() as usize;
    let small_max = (n as f64 / LARGE_SET_DIVISOR).floor() as usize;
    let left: Vec<usize> = (0..g.left_size()).collect();
    let right: Vec<usize> = (0..g.right_size()).collect();
    let mut trials = 0;
    for t in 0..sample_budget {
        trials += 1;
        let cond = t % 3;
        let flip = cond == 2;
        let (side, other_len) = if flip {
            (&right, g.left_size())
        } else {
            (&left, g.right_size())
        };
        let row = |v: usize| if flip { g.col(v) } else { g.row(v) };
        let size = if cond == 0 {
            stratified_size(&mut rng, quarter.max(1), side.len(), quarter.max(1))
        } else {
            if small_max == 0 {
                continue;
            }
            stratified_size(&mut rng, 1, small_max, small_max)
        };
        let x: Vec<usize> = side.choose_multiple(&mut rng, size).copied().collect();
        let mut into = vec![0usize; other_len];
        for &v in &x {
            for u in row(v).iter() {
                into[u] += 1;
            }
        }
        if cond == 0 {
            let y = extreme_k(&into, quarter.min(other_len), false);
            let e: usize = y.iter().map(|&u| into[u]).sum();
            let thr = d as f64 * n as f64 / LARGE_SET_EDGE_DIVISOR;
            if (e as f64) < thr {
                violations.push(ExpansionViolation {
                    condition: ExpansionCondition::LargeSets,
                    x,
                    y,
                    edges: e,
                    threshold: thr,
                });
            }
        } else {
            let k = (EXPANSION_FACTOR * x.len() - 1).min(other_len);
            let y = extreme_k(&into, k, true);
            let e: usize = y.iter().map(|&u| into[u]).sum();
            let thr = DENSE_FRACTION * d as f64 * x.len() as f64;
            if e as f64 >= thr {
                let (xx, yy) = if flip { (y, x) } else { (x, y) };
                violations.push(ExpansionViolation {
                    condition: if flip {
                        ExpansionCondition::RightExpansion
                    } else {
                        ExpansionCondition::LeftExpansion
                    },
                    x: xx,
                    y: yy,
                    edges: e,
                    threshold: thr,
                });
            }
        }
        if violations.len() >= 16 {
            break;
        }
    }
    ExpansionReport { trials, violations }
}

/// A random bipartite graph on `n + n` vertices with every degree at most
/// `max_deg`: edges of `host` are tried in random order and kept while both
/// endpoints have room.
pub fn random_bounded_degree_subgraph(host: &BipartiteGraph, max_deg: usize, seed: u64) -> BipartiteGraph {
    let mut rng = seed::rng(seed);
    let mut edges: Vec<(usize, usize)> = host.edges().collect();
    edges.shuffle(&mut rng);
    let mut h = BipartiteGraph::new(host.left_size(), host.right_size());
    for (a, b) in edges {
        if h.left_degree(a) < max_deg && h.right_degree(b) < max_deg && rng.gen_bool(0.5) {
            h.add_edge(a, b);
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_arc() {
        let mut net = FlowNetwork::new(2, 0, 1).unwrap();
        net.add_arc(0, 1, 5).unwrap();
        let r = max_flow(&net);
        assert_eq!(r.value, 5);
        assert_eq!(r.flows, vec![5]);
    }

    #[test]
    fn two_paths() {
        let mut net = FlowNetwork::new(4, 0, 3).unwrap();
        for x in [1, 2] {
            net.add_arc(0, x, 1).unwrap();
            net.add_arc(x, 3, 1).unwrap();
        }
        assert_eq!(max_flow(&net).value, 2);
    }

    #[test]
    fn rejects_arcs_into_source() {
        let mut net = FlowNetwork::new(3, 0, 2).unwrap();
        assert!(net.add_arc(1, 0, 1).is_err());
        assert!(net.add_arc(2, 1, 1).is_err());
    }

    #[test]
    fn matching_complement_degree_one() {
        let h = BipartiteGraph::from_edges(3, 3, [(0, 0), (1, 1), (2, 2)]).unwrap();
        let g = BipartiteGraph::complete(3, 3);
        let gp = complete_to_r_factor(&RFactorInstance { g, h: h.clone(), r: 2 }).unwrap();
        assert!(gp.is_regular(1));
        assert!(gp.edges().all(|(a, b)| !h.has_edge(a, b)));
    }

    #[test]
    fn infeasible_reports_flow() {
        let g = BipartiteGraph::from_edges(2, 2, [(0, 0), (1, 1)]).unwrap();
        let h = BipartiteGraph::new(2, 2);
        let err = complete_to_r_factor(&RFactorInstance { g, h, r: 2 }).unwrap_err();
        assert!(matches!(err, Error::Infeasible { achieved: 2, required: 4 }));
    }

    #[test]
    fn expansion_trivial_cases() {
        let k = BipartiteGraph::complete(20, 20);
        assert!(check_expansion_hypothesis(&k, 20, 300, 1).no_violation_found());
        let e = BipartiteGraph::new(20, 20);
        let rep = check_expansion_hypothesis(&e, 1, 300, 1);
        assert_eq!(rep.violations[0].condition, ExpansionCondition::MinDegree);
    }
}
