//! Brute-force oracles, written independently of the library algorithms.
#![allow(dead_code)]

use hamcycles::{BipartiteGraph, Digraph};
use itertools::Itertools;

/// Directed Hamilton cycles counted by trying every order of `1..n` after vertex 0.
pub fn ham_count_brute(d: &Digraph) -> u128 {
    let n = d.n();
    if n < 2 {
        return 0;
    }
    let mut count = 0u128;
    for perm in (1..n).permutations(n - 1) {
        let mut prev = 0;
        let mut ok = true;
        for &v in &perm {
            if !d.has_arc(prev, v) {
                ok = false;
                break;
            }
            prev = v;
        }
        if ok && d.has_arc(prev, 0) {
            count += 1;
        }
    }
    count
}

/// Perfect matchings counted over all permutations.
pub fn permanent_brute(b: &BipartiteGraph) -> u128 {
    let n = b.left_size();
    (0..n)
        .permutations(n)
        .filter(|perm| perm.iter().enumerate().all(|(a, &c)| b.has_edge(a, c)))
        .count() as u128
}

/// Maximum matching size over all edge subsets, for tiny graphs.
pub fn max_matching_brute(b: &BipartiteGraph) -> usize {
    let edges: Vec<(usize, usize)> = b.edges().collect();
    let mut best = 0;
    for mask in 0u32..(1 << edges.len()) {
        let mut used_l = 0u64;
        let mut used_r = 0u64;
        let mut ok = true;
        for (i, &(a, c)) in edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                if used_l >> a & 1 == 1 || used_r >> c & 1 == 1 {
                    ok = false;
                    break;
                }
                used_l |= 1 << a;
                used_r |= 1 << c;
            }
        }
        if ok {
            best = best.max(mask.count_ones() as usize);
        }
    }
    best
}

/// Minimum cut over all source-side vertex sets.
pub fn min_cut_brute(nodes: usize, source: usize, sink: usize, arcs: &[(usize, usize, u64)]) -> u64 {
    let others: Vec<usize> = (0..nodes).filter(|&v| v != source && v != sink).collect();
    let mut best = u64::MAX;
    for mask in 0u64..(1 << others.len()) {
        let mut side = vec![false; nodes];
        side[source] = true;
        for (i, &v) in others.iter().enumerate() {
            side[v] = mask >> i & 1 == 1;
        }
        let cut = arcs
            .iter()
            .filter(|&&(u, v, _)| side[u] && !side[v])
            .map(|&(_, _, c)| c)
            .sum();
        best = best.min(cut);
    }
    best
}

/// Whether the bipartite graph has an `r`-regular spanning subgraph, by
/// checking `e(X, Y) ≥ r(|X| + |Y| − N)` over all left sets `X` and right sets `Y`.
pub fn gale_ryser_brute(b: &BipartiteGraph, r: usize) -> bool {
    let n = b.left_size();
    for xm in 0u32..(1 << n) {
        for ym in 0u32..(1 << n) {
            let x = xm.count_ones() as i64;
            let y = ym.count_ones() as i64;
            let e = b
                .edges()
                .filter(|&(a, c)| xm >> a & 1 == 1 && ym >> c & 1 == 1)
                .count() as i64;
            if e < r as i64 * (x + y - n as i64) {
                return false;
            }
        }
    }
    true
}

/// Whether `order` visits every vertex once along arcs of `d`, closing up.
pub fn is_ham_cycle(d: &Digraph, order: &[usize]) -> bool {
    let n = d.n();
    if order.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    (0..n).all(|i| d.has_arc(order[i], order[(i + 1) % n]))
}

pub fn factorial(n: u32) -> u128 {
    (1..=u128::from(n)).product()
}
