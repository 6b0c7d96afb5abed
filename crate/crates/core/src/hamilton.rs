//! Finding and exactly counting directed Hamilton cycles.
//!
//! [`find_hamilton`] first draws a random cycle factor from a perfect matching
//! of the out/in split and merges its cycles by arc exchanges, restarting on
//! stagnation. Small instances that the heuristic does not settle go to an
//! exact backtracking search, which is the only source of "proven
//! non-Hamiltonian" answers besides the degree and cycle-factor checks.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Digraph, HamCycle};
use crate::matching::max_matching;
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverBudget {
    /// Search nodes allowed in the exact phase.
    pub node_limit: u64,
    /// Fresh cycle factors tried by the heuristic.
    pub restart_limit: u32,
    /// Soft wall-clock cap checked between restarts and every few thousand nodes.
    pub time_hint: Option<Duration>,
    /// Largest `n` handed to the exact phase (at most 64).
    pub exact_threshold: usize,
}

impl Default for SolverBudget {
    fn default() -> Self {
        SolverBudget {
            node_limit: 2_000_000,
            restart_limit: 40,
            time_hint: None,
            exact_threshold: 40,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NotFound {
    /// Budget ran out; the digraph may or may not be Hamiltonian.
    Exhausted,
    ProvenNonHamiltonian,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HamOutcome {
    Found(HamCycle),
    NotFound(NotFound),
}

impl HamOutcome {
    pub fn cycle(self) -> Option<HamCycle> {
        match self {
            HamOutcome::Found(c) => Some(c),
            HamOutcome::NotFound(_) => None,
        }
    }
}

/// Searches for a directed Hamilton cycle of `d`.
pub fn find_hamilton(d: &Digraph, budget: &SolverBudget, seed: u64) -> Result<HamOutcome> {
    let n = d.n();
    if n < 2 {
        return Err(Error::InvalidParameter("Hamilton cycles need n ≥ 2".into()));
    }
    if d.min_out_degree() == 0 || d.min_in_degree() == 0 {
        return Ok(HamOutcome::NotFound(NotFound::ProvenNonHamiltonian));
    }
    let start = Instant::now();
    let out_of_time = |t: &Instant| budget.time_hint.is_some_and(|h| t.elapsed() > h);
    let mut rng = seed::rng(seed);

    for _ in 0..budget.restart_limit.max(1) {
        if out_of_time(&start) {
            break;
        }
        let Some(mut succ) = random_cycle_factor(d, &mut rng) else {
            return Ok(HamOutcome::NotFound(NotFound::ProvenNonHamiltonian));
        };
        if merge_cycles(d, &mut succ, &mut rng) {
            let mut order = Vec::with_capacity(n);
            let mut v = 0;
            for _ in 0..n {
                order.push(v);
                v = succ[v];
            }
            return Ok(HamOutcome::Found(HamCycle::new(order)));
        }
    }

    if n <= budget.exact_threshold.min(64) {
        return Ok(exact_search(d, budget, start));
    }
    Ok(HamOutcome::NotFound(NotFound::Exhausted))
}

/// A spanning set of disjoint cycles as a successor array, or `None` when
/// none exists.
fn random_cycle_factor(d: &Digraph, rng: &mut seed::Rng) -> Option<Vec<usize>> {
    let n = d.n();
    let mut lp: Vec<usize> = (0..n).collect();
    let mut rp: Vec<usize> = (0..n).collect();
    lp.shuffle(rng);
    rp.shuffle(rng);
    let mut rinv = vec![0; n];
    for (i, &v) in rp.iter().enumerate() {
        rinv[v] = i;
    }
    let mut b = BipartiteGraph::new(n, n);
    for (i, &u) in lp.iter().enumerate() {
        for v in d.out_row(u).iter() {
            b.add_edge(i, rinv[v]);
        }
    }
    let m = max_matching(&b);
    if !m.is_perfect() {
        return None;
    }
    let mut succ = vec![0; n];
    for (i, j) in m.pairs() {
        succ[lp[i]] = rp[j];
    }
    Some(succ)
}

/// Cycle ids and the position of every vertex along its cycle.
fn cycle_structure(succ: &[usize]) -> (Vec<usize>, Vec<usize>, Vec<Vec<usize>>) {
    let n = succ.len();
    let mut id = vec![usize::MAX; n];
    let mut pos = vec![0; n];
    let mut cycles = Vec::new();
    for s in 0..n {
        if id[s] != usize::MAX {
            continue;
        }
        let c = cycles.len();
        let mut cyc = Vec::new();
        let mut v = s;
        while id[v] == usize::MAX {
            id[v] = c;
            pos[v] = cyc.len();
            cyc.push(v);
            v = succ[v];
        }
        cycles.push(cyc);
    }
    (id, pos, cycles)
}

/// Merges the cycles of `succ` into one by arc exchanges; false on stagnation.
fn merge_cycles(d: &Digraph, succ: &mut [usize], rng: &mut seed::Rng) -> bool {
    let n = d.n();
    let mut pred = vec![0; n];
    loop {
        let (id, pos, mut cycles) = cycle_structure(succ);
        if cycles.len() == 1 {
            return true;
        }
        for (v, &s) in succ.iter().enumerate() {
            pred[s] = v;
        }
        cycles.sort_by_key(Vec::len);
        let merged = cycles
            .iter()
            .any(|c| two_exchange(d, succ, &pred, &id, c, rng) || four_exchange(d, succ, &id, &pos, &cycles, c, rng));
        if !merged {
            return false;
        }
    }
}

/// Finds `a ∈ C`, `x ∉ C` with arcs `x → σ(a)` and `a → σ(x)`, and swaps successors.
fn two_exchange(
    d: &Digraph,
    succ: &mut [usize],
    pred: &[usize],
    id: &[usize],
    c: &[usize],
    rng: &mut seed::Rng,
) -> bool {
    let n = d.n();
    let cid = id[c[0]];
    let mut order = c.to_vec();
    order.shuffle(rng);
    let mut cand = BitSet::new(n);
    for &a in &order {
        let sa = succ[a];
        cand.clear();
        for y in d.out_row(a).iter() {
            let x = pred[y];
            if id[x] != cid {
                cand.insert(x);
            }
        }
        cand.intersect_with(d.in_row(sa));
        let xs: Vec<usize> = cand.iter().collect();
        if let Some(&x) = xs.choose(rng) {
            succ[a] = succ[x];
            succ[x] = sa;
            return true;
        }
    }
    false
}

/// For `a ∈ C` and `x, y, z` in order along another cycle `B`, uses arcs
/// `x → σ(a)`, `a → σ(y)`, `z → σ(x)`, `y → σ(z)` to splice `C` into `B`.
fn four_exchange(
    d: &Digraph,
    succ: &mut [usize],
    id: &[usize],
    pos: &[usize],
    cycles: &[Vec<usize>],
    c: &[usize],
    rng: &mut seed::Rng,
) -> bool {
    let cid = id[c[0]];
    let mut order = c.to_vec();
    order.shuffle(rng);
    for &a in &order {
        let sa = succ[a];
        let mut xs: Vec<usize> = d.in_row(sa).iter().filter(|&x| id[x] != cid).collect();
        xs.shuffle(rng);
        for x in xs {
            let b = cycles.iter().find(|cy| id[cy[0]] == id[x]).expect("cycle of x");
            let k = b.len();
            if k < 3 {
                continue;
            }
            let px = pos[x];
            // offset along B measured from x
            let off = |v: usize| (pos[v] + k - px) % k;
            let sx = succ[x];
            let ys: Vec<usize> = d
                .out_row(a)
                .iter()
                .filter(|&w| id[w] == id[x])
                .map(|w| b[(pos[w] + k - 1) % k])
                .collect();
            for y in ys {
                let oy = off(y);
                if oy == 0 || oy == k - 1 {
                    continue;
                }
                // z strictly after y, arcs z → σ(x) and y → σ(z)
                for z in d.in_row(sx).iter() {
                    if id[z] != id[x] {
                        continue;
                    }
                    let oz = off(z);
                    if oz > oy && d.has_arc(y, succ[z]) {
                        let (sy, sz) = (succ[y], succ[z]);
                        succ[x] = sa;
                        succ[a] = sy;
                        succ[z] = sx;
                        succ[y] = sz;
                        return true;
                    }
                }
            }
        }
    }
    false
}

fn exact_search(d: &Digraph, budget: &SolverBudget, start: Instant) -> HamOutcome {
    let n = d.n();
    let out: Vec<u64> = (0..n).map(|v| d.out_row(v).words()[0]).collect();
    let inc: Vec<u64> = (0..n).map(|v| d.in_row(v).words()[0]).collect();
    let mut s = Search {
        n,
        out,
        inc,
        path: vec![0],
        nodes: 0,
        limit: budget.node_limit,
        time_hint: budget.time_hint,
        start,
        aborted: false,
    };
    if s.extend(1u64) {
        HamOutcome::Found(HamCycle::new(s.path))
    } else if s.aborted {
        HamOutcome::NotFound(NotFound::Exhausted)
    } else {
        HamOutcome::NotFound(NotFound::ProvenNonHamiltonian)
    }
}

struct Search {
    n: usize,
    out: Vec<u64>,
    inc: Vec<u64>,
    path: Vec<usize>,
    nodes: u64,
    limit: u64,
    time_hint: Option<Duration>,
    start: Instant,
    aborted: bool,
}

impl Search {
    fn extend(&mut self, visited: u64) -> bool {
        let n = self.n;
        let v = *self.path.last().unwrap();
        if self.path.len() == n {
            return self.out[v] & 1 == 1;
        }
        self.nodes += 1;
        if self.nodes > self.limit
            || (self.nodes.is_multiple_of(4096) && self.time_hint.is_some_and(|h| self.start.elapsed() > h))
        {
            self.aborted = true;
            return false;
        }
        let all = if n == 64 { !0 } else { (1u64 << n) - 1 };
        let free = all & !visited;
        // every free vertex needs an entry from free ∪ {v} and an exit to free ∪ {0}
        let mut forced = None;
        let mut f = free;
        while f != 0 {
            let u = f.trailing_zeros() as usize;
            f &= f - 1;
            let ins = self.inc[u] & (free | 1 << v);
            if ins == 0 || self.out[u] & (free | 1) == 0 {
                return false;
            }
            if ins == 1 << v {
                if forced.is_some() {
                    return false;
                }
                forced = Some(u);
            }
        }
        let mut cands: Vec<usize> = match forced {
            Some(u) => vec![u],
            None => {
                let mut c = Vec::new();
                let mut f = self.out[v] & free;
                while f != 0 {
                    c.push(f.trailing_zeros() as usize);
                    f &= f - 1;
                }
                c
            }
        };
        cands.sort_by_key(|&u| (self.out[u] & free).count_ones());
        for u in cands {
            self.path.push(u);
            if self.extend(visited | 1 << u) {
                return true;
            }
            self.path.pop();
            if self.aborted {
                return false;
            }
        }
        false
    }
}

/// Largest `n` accepted by [`count_hamilton_exact`].
pub const COUNT_LIMIT: usize = 22;

/// Exact number of directed Hamilton cycles by dynamic programming over
/// (visited set, endpoint) with paths anchored at vertex 0.
pub fn count_hamilton_exact(d: &Digraph) -> Result<u128> {
    let n = d.n();
    if n > COUNT_LIMIT {
        return Err(Error::SizeLimit {
            what: "vertex count for exact counting",
            limit: COUNT_LIMIT,
            got: n,
        });
    }
    if n < 2 {
        return Ok(0);
    }
    let k = n - 1; // vertices 1..n-1 become bits 0..k-1
    let out: Vec<u32> = (0..n)
        .map(|v| d.out_row(v).iter().filter(|&w| w > 0).fold(0u32, |a, w| a | 1 << (w - 1)))
        .collect();
    let full = (1usize << k) - 1;
    let mut dp = vec![0u64; (1usize << k) * k];
    for w in 0..k {
        if out[0] >> w & 1 == 1 {
            dp[(1 << w) * k + w] = 1;
        }
    }
    for mask in 1..=full {
        let base = mask * k;
        let mut m = mask;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            let c = dp[base + v];
            if c == 0 {
                continue;
            }
            let mut nxt = out[v + 1] as usize & !mask;
            while nxt != 0 {
                let w = nxt.trailing_zeros() as usize;
                nxt &= nxt - 1;
                dp[(mask | 1 << w) * k + w] += c;
            }
        }
    }
    let total = (0..k)
        .filter(|&v| d.has_arc(v + 1, 0))
        .map(|v| dp[full * k + v] as u128)
        .sum();
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{sample_dnp, verify_cycle};

    #[test]
    fn directed_cycle_is_found() {
        let d = Digraph::directed_cycle(9);
        let c = find_hamilton(&d, &SolverBudget::default(), 1).unwrap().cycle().unwrap();
        assert!(verify_cycle(&d, &c));
    }

    #[test]
    fn zero_out_degree_is_proven() {
        let mut d = Digraph::complete(6);
        for v in 0..6 {
            d.remove_arc(3, v);
        }
        assert_eq!(
            find_hamilton(&d, &SolverBudget::default(), 1).unwrap(),
            HamOutcome::NotFound(NotFound::ProvenNonHamiltonian)
        );
    }

    #[test]
    fn two_disjoint_cycles_are_proven_non_hamiltonian() {
        let d = Digraph::from_arcs(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap();
        assert_eq!(
            find_hamilton(&d, &SolverBudget::default(), 2).unwrap(),
            HamOutcome::NotFound(NotFound::ProvenNonHamiltonian)
        );
    }

    #[test]
    fn dense_random_instance() {
        let d = sample_dnp(200, 0.15, 5).unwrap();
        let c = find_hamilton(&d, &SolverBudget::default(), 5).unwrap().cycle().unwrap();
        assert!(verify_cycle(&d, &c));
    }

    #[test]
    fn counts_of_simple_graphs() {
        assert_eq!(count_hamilton_exact(&Digraph::complete(4)).unwrap(), 6);
        assert_eq!(count_hamilton_exact(&Digraph::complete(2)).unwrap(), 1);
        assert_eq!(count_hamilton_exact(&Digraph::directed_cycle(7)).unwrap(), 1);
        assert!(matches!(
            count_hamilton_exact(&Digraph::empty(23)),
            Err(Error::SizeLimit { .. })
        ));
    }
}
