mod common;

use std::collections::BTreeSet;

use common::*;
use hamcycles::bitset::BitSet;
use hamcycles::flow::{complete_to_r_factor, random_bounded_degree_subgraph, RFactorInstance};
use hamcycles::graph::{
    classify_edge, contract, io, layer_bipartite, lift_cycle, make_partition, path_system_from_matchings,
    sample_bipartite, sample_dnp, verify_cycle, verify_system, EdgeClass,
};
use hamcycles::hamilton::{count_hamilton_exact, find_hamilton, HamOutcome, SolverBudget};
use hamcycles::matching::{hall_decompose, max_matching, random_regular_bipartite};
use hamcycles::pipelines::{assign_edges, sample_partitions, AssignMode};
use hamcycles::{seed, Digraph, HamCycle};
use itertools::Itertools;
use proptest::prelude::*;
use rand::seq::SliceRandom;

/// A valid `(n, ℓ, s)` shape.
fn shape() -> impl Strategy<Value = (usize, usize, usize)> {
    (2usize..6, 1usize..6, 1usize..5).prop_map(|(ell, m, s)| (m * ell + s, ell, s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bitset_matches_btreeset(len in 1usize..200, a in prop::collection::vec(0usize..200, 0..60), b in prop::collection::vec(0usize..200, 0..60)) {
        let a: BTreeSet<usize> = a.into_iter().filter(|&x| x < len).collect();
        let b: BTreeSet<usize> = b.into_iter().filter(|&x| x < len).collect();
        let sa = BitSet::from_iter_with_len(len, a.iter().copied());
        let sb = BitSet::from_iter_with_len(len, b.iter().copied());
        prop_assert_eq!(sa.count(), a.len());
        prop_assert_eq!(sa.iter().collect::<Vec<_>>(), a.iter().copied().collect::<Vec<_>>());
        prop_assert_eq!(sa.intersection_count(&sb), a.intersection(&b).count());
        prop_assert_eq!(sa.first_common(&sb), a.intersection(&b).next().copied());
        let mut u = sa.clone();
        u.union_with(&sb);
        prop_assert_eq!(u.iter().collect::<Vec<_>>(), a.union(&b).copied().collect::<Vec<_>>());
        let mut d = sa.clone();
        d.difference_with(&sb);
        prop_assert_eq!(d.iter().collect::<Vec<_>>(), a.difference(&b).copied().collect::<Vec<_>>());
    }

    #[test]
    fn digraph_io_round_trips(n in 1usize..40, p in 0.0f64..1.0, s in any::<u64>()) {
        let d = sample_dnp(n, p, s).unwrap();
        let mut text = Vec::new();
        io::write_text(&d, &mut text).unwrap();
        prop_assert_eq!(&io::read_text(&text[..]).unwrap(), &d);
        let mut bin = Vec::new();
        io::write_binary(&d, &mut bin).unwrap();
        prop_assert_eq!(&io::read_any(&bin[..]).unwrap(), &d);
        prop_assert_eq!(&io::read_any(&text[..]).unwrap(), &d);
    }

    #[test]
    fn partitions_are_permutations_with_template_counts((n, ell, s) in shape(), seed in any::<u64>()) {
        let v = make_partition(n, ell, s, seed).unwrap();
        let m = (n - s) / ell;
        prop_assert_eq!(v.block(0).len(), s);
        let mut all: Vec<usize> = (0..=ell).flat_map(|j| v.block(j).to_vec()).collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        let d = Digraph::complete(n);
        let (mut interior, mut exterior) = (0, 0);
        for (a, b) in d.arcs() {
            match classify_edge(&v, a, b) {
                EdgeClass::Interior => interior += 1,
                EdgeClass::Exterior => exterior += 1,
                EdgeClass::Absent => {}
            }
        }
        prop_assert_eq!(interior, (ell - 1) * m * m);
        prop_assert_eq!(exterior, m * m + 2 * s * m + s * (s - 1));
    }

    #[test]
    fn pack_assignment_partitions_the_arcs(n in 12usize..40, t in 1usize..6, s in any::<u64>()) {
        let d = sample_dnp(n, 0.4, s).unwrap();
        let ell = 3;
        let sz = 2 + (n - 2) % ell;
        let (parts, _, _) = sample_partitions(n, ell, sz, t, s, false, 0).unwrap();
        let (asg, subs) = assign_edges(&d, &parts, AssignMode::Pack, 2.0, s).unwrap();
        let mut seen = Digraph::empty(n);
        for (i, sub) in subs.iter().enumerate() {
            for (a, b) in sub.arcs() {
                prop_assert!(d.has_arc(a, b));
                prop_assert!(!seen.has_arc(a, b));
                prop_assert_eq!(asg.owner(a, b), Some(i));
                let c = classify_edge(&parts[i], a, b);
                prop_assert!(c != EdgeClass::Absent);
                seen.add_arc(a, b);
            }
        }
        prop_assert_eq!(seen.edge_count() + asg.unassigned(&d), d.edge_count());
    }

    #[test]
    fn lifted_cycles_are_hamiltonian((n, ell, s) in shape(), p in 0.3f64..0.9, sd in any::<u64>()) {
        let v = make_partition(n, ell, s, sd).unwrap();
        let m = v.m();
        let mut rng = seed::rng(sd);
        let mates: Vec<Vec<usize>> = (1..ell)
            .map(|_| {
                let mut p: Vec<usize> = (0..m).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect();
        let sys = path_system_from_matchings(&v, &mates).unwrap();
        prop_assert!(verify_system(&v, &sys));
        let mut d = sample_dnp(n, p, sd ^ 1).unwrap();
        for (a, b) in sys.arcs() {
            d.add_arc(a, b);
        }
        prop_assert!(sys.arcs_in(&d));
        let c = contract(&d, &sys.endpoints(), v.block(0)).unwrap();
        prop_assert_eq!(c.n(), s + m);
        if let HamOutcome::Found(h) = find_hamilton(&c, &SolverBudget::default(), sd).unwrap() {
            let lifted = lift_cycle(&h, &sys, v.block(0)).unwrap();
            prop_assert!(verify_cycle(&d, &lifted));
            prop_assert!(is_ham_cycle(&d, &lifted.order));
        }
    }

    #[test]
    fn hall_decomposition_splits_regular_graphs(n in 1usize..30, r in 0usize..8, sd in any::<u64>()) {
        let r = r.min(n);
        let g = random_regular_bipartite(n, r, sd).unwrap();
        let fam = hall_decompose(&g, r).unwrap();
        prop_assert_eq!(fam.len(), r);
        prop_assert!(fam.is_valid_in(&g));
        prop_assert_eq!(fam.union_graph().edge_count(), g.edge_count());
        prop_assert!(fam.matchings.iter().all(|m| m.is_perfect()));
    }

    #[test]
    fn completion_meets_its_postcondition(n in 4usize..24, p in 0.5f64..1.0, dh in 0usize..3, extra in 0usize..4, sd in any::<u64>()) {
        let g = sample_bipartite(n, n, p, sd).unwrap();
        let h = random_bounded_degree_subgraph(&g, dh, sd ^ 7);
        let r = 2 * h.max_degree() + extra;
        if let Ok(gp) = complete_to_r_factor(&RFactorInstance { g: g.clone(), h: h.clone(), r }) {
            prop_assert!(gp.edges().all(|(a, b)| g.has_edge(a, b) && !h.has_edge(a, b)));
            prop_assert!(gp.union(&h).is_regular(r));
        }
    }

    #[test]
    fn matching_is_valid_and_maximal(l in 1usize..20, r in 1usize..20, p in 0.0f64..1.0, sd in any::<u64>()) {
        let b = sample_bipartite(l, r, p, sd).unwrap();
        let m = max_matching(&b);
        prop_assert!(m.is_valid_in(&b));
        // no edge joins two unmatched vertices
        let matched_r: BTreeSet<usize> = m.pairs().map(|(_, c)| c).collect();
        for (a, c) in b.edges() {
            prop_assert!(m.mate(a).is_some() || matched_r.contains(&c));
        }
    }

    #[test]
    fn exact_count_ignores_labels(n in 3usize..10, p in 0.2f64..0.9, sd in any::<u64>()) {
        let d = sample_dnp(n, p, sd).unwrap();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut seed::rng(sd));
        let e = d.relabel(&perm);
        prop_assert_eq!(count_hamilton_exact(&d).unwrap(), count_hamilton_exact(&e).unwrap());
    }

    #[test]
    fn canonical_cycle_is_rotation_invariant(n in 2usize..20, k in 0usize..20, sd in any::<u64>()) {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut seed::rng(sd));
        let mut rot = order.clone();
        rot.rotate_left(k % n);
        prop_assert_eq!(HamCycle::new(order).canonical(), HamCycle::new(rot).canonical());
    }
}

/// Summing contracted Hamilton counts over every path system of a partition
/// recovers the Hamilton cycles of `D` inside the template.
#[test]
fn system_sum_equals_template_count() {
    for sd in 0..20u64 {
        let (n, ell, s) = [(7, 2, 1), (8, 3, 2), (9, 2, 3), (9, 4, 1)][(sd % 4) as usize];
        let d = sample_dnp(n, 0.6, 100 + sd).unwrap();
        let v = make_partition(n, ell, s, sd).unwrap();
        let m = v.m();
        let mut template = Digraph::empty(n);
        for (a, b) in d.arcs() {
            if classify_edge(&v, a, b) != EdgeClass::Absent {
                template.add_arc(a, b);
            }
        }
        let layers: Vec<_> = (1..ell).map(|j| layer_bipartite(&d, &v, j)).collect();
        let pms: Vec<Vec<Vec<usize>>> = layers
            .iter()
            .map(|g| {
                (0..m)
                    .permutations(m)
                    .filter(|p| p.iter().enumerate().all(|(a, &b)| g.has_edge(a, b)))
                    .collect()
            })
            .collect();
        let mut total = 0u128;
        for choice in pms.iter().map(|l| l.iter()).multi_cartesian_product() {
            let mates: Vec<Vec<usize>> = choice.into_iter().cloned().collect();
            let sys = path_system_from_matchings(&v, &mates).unwrap();
            let c = contract(&d, &sys.endpoints(), v.block(0)).unwrap();
            total += count_hamilton_exact(&c).unwrap();
        }
        assert_eq!(total, ham_count_brute(&template), "seed {sd}");
    }
}
