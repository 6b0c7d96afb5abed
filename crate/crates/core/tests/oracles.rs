mod common;

use common::*;
use hamcycles::flow::{complete_to_r_factor, max_flow, FlowNetwork, RFactorInstance};
use hamcycles::graph::{sample_bipartite, sample_dnp};
use hamcycles::hamilton::{count_hamilton_exact, find_hamilton, HamOutcome, NotFound, SolverBudget};
use hamcycles::matching::{
    count_pms, gale_ryser_feasible, hall_decompose, ln_factorial, max_matching, max_regular_factor, vdw_bound,
};
use hamcycles::seed;
use hamcycles::{BipartiteGraph, Digraph};
use rand::Rng;

#[test]
fn hamilton_count_matches_permutations() {
    for i in 0..60u64 {
        let n = 3 + (i % 6) as usize;
        let p = [0.3, 0.5, 0.7][(i % 3) as usize];
        let d = sample_dnp(n, p, 1000 + i).unwrap();
        assert_eq!(count_hamilton_exact(&d).unwrap(), ham_count_brute(&d), "n={n} p={p} seed={i}");
    }
}

#[test]
fn hamilton_count_of_complete_digraphs() {
    for n in 2..=10u32 {
        let d = Digraph::complete(n as usize);
        assert_eq!(count_hamilton_exact(&d).unwrap(), factorial(n - 1), "n={n}");
    }
}

#[test]
fn solver_agrees_with_exact_count_on_small_digraphs() {
    let budget = SolverBudget::default();
    for i in 0..80u64 {
        let n = 4 + (i % 9) as usize;
        let d = sample_dnp(n, 0.35, 2000 + i).unwrap();
        let exact = count_hamilton_exact(&d).unwrap();
        match find_hamilton(&d, &budget, i).unwrap() {
            HamOutcome::Found(c) => {
                assert!(exact > 0);
                assert!(is_ham_cycle(&d, &c.order));
            }
            HamOutcome::NotFound(why) => {
                assert_eq!(exact, 0, "n={n} seed={i}");
                // the exact search is complete below its threshold
                assert_eq!(why, NotFound::ProvenNonHamiltonian);
            }
        }
    }
}

#[test]
fn permanent_matches_permutations() {
    for i in 0..80u64 {
        let n = 1 + (i % 8) as usize;
        let b = sample_bipartite(n, n, 0.55, 3000 + i).unwrap();
        assert_eq!(count_pms(&b).unwrap(), permanent_brute(&b), "n={n} seed={i}");
    }
}

#[test]
fn permanent_of_complete_graphs_is_factorial() {
    for n in 1..=12u32 {
        let b = BipartiteGraph::complete(n as usize, n as usize);
        assert_eq!(count_pms(&b).unwrap(), factorial(n));
    }
}

#[test]
fn vdw_bound_is_exact_for_complete_graphs() {
    // r = N gives ln N! exactly
    for n in 1..=10 {
        assert!((vdw_bound(n, n).unwrap() - ln_factorial(n)).abs() < 1e-9);
    }
}

#[test]
fn maximum_matching_matches_subset_search() {
    for i in 0..60u64 {
        let l = 1 + (i % 5) as usize;
        let r = 1 + ((i / 5) % 5) as usize;
        let b = sample_bipartite(l, r, 0.4, 4000 + i).unwrap();
        if b.edge_count() > 18 {
            continue;
        }
        let m = max_matching(&b);
        assert!(m.is_valid_in(&b));
        assert_eq!(m.size(), max_matching_brute(&b), "seed={i}");
    }
}

#[test]
fn max_flow_equals_brute_min_cut() {
    let mut rng = seed::rng(77);
    for _ in 0..60 {
        let nodes = rng.gen_range(2..=8);
        let mut net = FlowNetwork::new(nodes, 0, nodes - 1).unwrap();
        let mut arcs = Vec::new();
        for u in 0..nodes {
            for v in 0..nodes {
                if u != v && v != 0 && u != nodes - 1 && rng.gen_bool(0.4) {
                    let c = rng.gen_range(0..6);
                    net.add_arc(u, v, c).unwrap();
                    arcs.push((u, v, c));
                }
            }
        }
        let res = max_flow(&net);
        assert_eq!(res.value, min_cut_brute(nodes, 0, nodes - 1, &arcs));
        // the reported source side is a cut of that value
        let cut: u64 = arcs
            .iter()
            .filter(|&&(u, v, _)| res.source_side.contains(u) && !res.source_side.contains(v))
            .map(|a| a.2)
            .sum();
        assert_eq!(cut, res.value);
    }
}

#[test]
fn gale_ryser_matches_subset_enumeration() {
    for i in 0..60u64 {
        let n = 1 + (i % 5) as usize;
        let b = sample_bipartite(n, n, 0.6, 5000 + i).unwrap();
        for r in 0..=n {
            let gr = gale_ryser_feasible(&b, r).unwrap();
            assert_eq!(gr.feasible, gale_ryser_brute(&b, r), "n={n} r={r} seed={i}");
            if let Some((x, y)) = gr.witness {
                let e = b.edges().filter(|(a, c)| x.contains(a) && y.contains(c)).count() as i64;
                assert!(e < r as i64 * (x.len() as i64 + y.len() as i64 - n as i64));
            }
        }
    }
}

#[test]
fn max_regular_factor_is_the_largest_feasible_r() {
    for i in 0..40u64 {
        let n = 2 + (i % 4) as usize;
        let b = sample_bipartite(n, n, 0.7, 6000 + i).unwrap();
        let (r, f) = max_regular_factor(&b).unwrap();
        assert!(gale_ryser_brute(&b, r));
        assert!(r == n || !gale_ryser_brute(&b, r + 1));
        assert!(f.is_regular(r) || r == 0);
        assert_eq!(hall_decompose(&f, r).unwrap().len(), r);
    }
}

#[test]
fn completion_on_complete_host_with_sparse_h_is_feasible() {
    for i in 0..30u64 {
        let n = 4 + (i % 5) as usize;
        let g = BipartiteGraph::complete(n, n);
        let h = hamcycles::flow::random_bounded_degree_subgraph(&g, 1 + (i % 2) as usize, i);
        let dh = h.max_degree();
        for r in (2 * dh).max(1)..=n - dh {
            let gp = complete_to_r_factor(&RFactorInstance { g: g.clone(), h: h.clone(), r }).unwrap();
            assert_eq!(gp.union(&h).edge_count(), n * r);
            assert!(gp.union(&h).is_regular(r));
            assert!(gp.edges().all(|(a, c)| !h.has_edge(a, c)));
        }
    }
}

#[test]
fn completion_can_fail_when_h_is_as_dense_as_r() {
    // x–y in H, everything else K₃,₃ minus a perfect matching: x and y each
    // need one more edge and the only one between them is taken
    let mut h = BipartiteGraph::new(4, 4);
    h.add_edge(0, 0);
    for a in 1..4 {
        for c in 1..4 {
            if a != c {
                h.add_edge(a, c);
            }
        }
    }
    let g = BipartiteGraph::complete(4, 4);
    let r = complete_to_r_factor(&RFactorInstance { g, h, r: 2 });
    assert!(matches!(r, Err(hamcycles::Error::Infeasible { .. })));
}
