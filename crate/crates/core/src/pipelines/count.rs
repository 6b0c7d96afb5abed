//! Certified lower bounds on the number of Hamilton cycles.
//!
//! `V₀` is fixed once. For a partition `V` with that `V₀`, every Hamilton
//! cycle of `D ∩ D_n(V)` splits uniquely into a matching path system and a
//! Hamilton cycle of the contracted digraph, and the cycle together with `V₀`
//! determines `V`. So cycles counted under distinct partitions are distinct,
//! and summing per-partition counts over any set of distinct partitions gives
//! a lower bound on the number of Hamilton cycles of `D`.
//!
//! Per partition the count is exact when all path systems can be enumerated
//! and each contraction is small enough for the subset DP; otherwise it is
//! the number of sampled systems that were completed and verified.

use std::collections::HashSet;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::ExperimentParams;
use crate::error::{Error, Result};
use crate::graph::{
    contract, layer_bipartite, lift_cycle, path_system_from_matchings, verify_cycle, BipartiteGraph,
    Digraph, PartitionScheme, PathSystem,
};
use crate::hamilton::{count_hamilton_exact, find_hamilton, HamOutcome, SolverBudget, COUNT_LIMIT};
use crate::matching::{count_pms, ln_factorial, max_matching, max_regular_factor, vdw_bound, Matching};
use crate::seed;

/// Layers up to this size get an exact permanent; Ryser at 30 is too slow for routine runs.
pub const EXACT_PERMANENT_M: usize = 20;
/// Systems sampled per partition when enumeration is out of reach.
pub const SAMPLED_SYSTEMS: usize = 16;
/// Systems per partition re-checked by search, lift and verification.
pub const SPOT_CHECKS: usize = 4;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LayerCount {
    /// Largest `r` with an `r`-regular spanning subgraph of the layer.
    pub r_hat: usize,
    /// `ln` of the van der Waerden bound for that subgraph, when `r̂ > 0`.
    pub ln_vdw: Option<f64>,
    /// Perfect matchings of the whole layer, when `m` is small enough.
    pub exact_pms: Option<u128>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartitionCount {
    pub index: usize,
    pub seed: u64,
    pub layers: Vec<LayerCount>,
    /// Lower bound on `ln |Λ_V|` from the per-layer counts.
    pub ln_path_systems: f64,
    /// All path systems were enumerated and each contraction counted exactly.
    pub exact: bool,
    pub systems_seen: usize,
    /// Systems re-checked by search, lift and verification.
    pub checked: usize,
    pub completed: usize,
    /// Hamilton cycles of `D ∩ D_n(V)`: exact, or the verified sample count.
    pub cycles: u128,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountCertificate {
    pub params: ExperimentParams,
    pub seed: u64,
    pub v0: Vec<usize>,
    pub partitions: Vec<PartitionCount>,
    /// Partitions dropped because some layer has no perfect matching.
    pub discarded: Vec<String>,
    /// `ln` of the certified number of Hamilton cycles; `None` when zero.
    pub ln_certified: Option<f64>,
    /// True when every kept partition was counted exactly.
    pub all_exact: bool,
    /// `ln((n − s)! / (m!)^ℓ)`, the number of partitions with this `V₀`.
    pub ln_partitions_total: f64,
    /// Extrapolation: total partitions times the mean per-partition count.
    /// Not certified.
    pub ln_extrapolated: Option<f64>,
    /// Fraction of re-checked systems that completed.
    pub completion_rate: f64,
    /// `ln(n! pⁿ)`.
    pub ln_reference: f64,
    pub exact_count: Option<u128>,
    pub ln_exact: Option<f64>,
    /// `(ln exact − ln(n! pⁿ)) / n`.
    pub gap_per_vertex: Option<f64>,
    pub wall_ms: u128,
}

/// All perfect matchings of `g` as permutations, or `None` past `cap`.
fn enumerate_pms(g: &BipartiteGraph, cap: usize) -> Option<Vec<Vec<usize>>> {
    fn go(g: &BipartiteGraph, a: usize, used: &mut [bool], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, cap: usize) -> bool {
        if a == g.left_size() {
            out.push(cur.clone());
            return out.len() <= cap;
        }
        for b in g.row(a).iter() {
            if !used[b] {
                used[b] = true;
                cur.push(b);
                let ok = go(g, a + 1, used, cur, out, cap);
                cur.pop();
                used[b] = false;
                if !ok {
                    return false;
                }
            }
        }
        true
    }
    let mut out = Vec::new();
    let mut used = vec![false; g.right_size()];
    go(g, 0, &mut used, &mut Vec::new(), &mut out, cap).then_some(out)
}

/// A perfect matching of `g` from a randomly relabelled maximum matching.
fn random_pm(g: &BipartiteGraph, rng: &mut seed::Rng) -> Option<Vec<usize>> {
    let m = g.left_size();
    let mut pl: Vec<usize> = (0..m).collect();
    let mut pr: Vec<usize> = (0..m).collect();
    pl.shuffle(rng);
    pr.shuffle(rng);
    let h = BipartiteGraph::from_edges(m, m, g.edges().map(|(a, b)| (pl[a], pr[b]))).ok()?;
    let mm: Matching = max_matching(&h);
    let perm = mm.as_permutation()?;
    let mut inv_l = vec![0; m];
    let mut inv_r = vec![0; m];
    for i in 0..m {
        inv_l[pl[i]] = i;
        inv_r[pr[i]] = i;
    }
    let mut out = vec![0; m];
    for (a2, &b2) in perm.iter().enumerate() {
        out[inv_l[a2]] = inv_r[b2];
    }
    Some(out)
}

fn budget() -> SolverBudget {
    SolverBudget {
        node_limit: 100_000,
        restart_limit: 20,
        time_hint: None,
        exact_threshold: 40,
    }
}

/// Searches for a Hamilton cycle through `sys`, lifts it and checks it in `d`.
fn complete(d: &Digraph, part: &PartitionScheme, sys: &PathSystem, seed: u64) -> Result<bool> {
    let v0 = part.block(0);
    let c = contract(d, &sys.endpoints(), v0)?;
    match find_hamilton(&c, &budget(), seed)? {
        HamOutcome::Found(h) => {
            let lifted = lift_cycle(&h, sys, v0)?;
            if !verify_cycle(d, &lifted) {
                return Err(Error::InternalInvariant("lifted cycle failed verification".into()));
            }
            Ok(true)
        }
        HamOutcome::NotFound(_) => Ok(false),
    }
}

fn count_partition(
    d: &Digraph,
    part: &PartitionScheme,
    enum_cap: usize,
    index: usize,
    seed: u64,
) -> Result<std::result::Result<PartitionCount, String>> {
    let (ell, m) = (part.ell(), part.m());
    let layers: Vec<BipartiteGraph> = (1..ell).map(|j| layer_bipartite(d, part, j)).collect();
    let mut counts = Vec::with_capacity(layers.len());
    let mut ln_systems = 0.0;
    for (j, g) in layers.iter().enumerate() {
        let (r_hat, _) = max_regular_factor(g)?;
        if r_hat == 0 {
            return Ok(Err(format!("partition {index}: layer {} has no perfect matching", j + 1)));
        }
        let ln_vdw = vdw_bound(m, r_hat)?;
        let exact_pms = if m <= EXACT_PERMANENT_M { Some(count_pms(g)?) } else { None };
        ln_systems += exact_pms.map_or(ln_vdw, |c| (c as f64).ln());
        counts.push(LayerCount {
            r_hat,
            ln_vdw: Some(ln_vdw),
            exact_pms,
        });
    }

    let mut rng = seed::rng(seed::derive(seed, "systems", 0));
    let all: Option<Vec<Vec<Vec<usize>>>> = layers.iter().map(|g| enumerate_pms(g, enum_cap)).collect();
    let total = all
        .as_ref()
        .map(|a| a.iter().try_fold(1usize, |acc, l| acc.checked_mul(l.len()).filter(|&x| x <= enum_cap)));
    let contracted_size = part.s() + m;

    let mut out = PartitionCount {
        index,
        seed,
        layers: counts,
        ln_path_systems: ln_systems,
        exact: false,
        systems_seen: 0,
        checked: 0,
        completed: 0,
        cycles: 0,
    };

    if let (Some(all), Some(Some(total))) = (&all, total) {
        if contracted_size <= COUNT_LIMIT {
            // mixed-radix walk over one matching per layer
            let mut idx = vec![0usize; all.len()];
            let mut sum = 0u128;
            let mut systems = Vec::with_capacity(total);
            loop {
                let mates: Vec<Vec<usize>> = idx.iter().zip(all).map(|(&i, l)| l[i].clone()).collect();
                let sys = path_system_from_matchings(part, &mates)?;
                let c = contract(d, &sys.endpoints(), part.block(0))?;
                sum += count_hamilton_exact(&c)?;
                systems.push(sys);
                let mut k = 0;
                while k < idx.len() {
                    idx[k] += 1;
                    if idx[k] < all[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == idx.len() {
                    break;
                }
            }
            out.exact = true;
            out.systems_seen = systems.len();
            out.cycles = sum;
            systems.shuffle(&mut rng);
            for (k, sys) in systems.iter().take(SPOT_CHECKS).enumerate() {
                out.checked += 1;
                if complete(d, part, sys, seed::derive(seed, "check", k as u64))? {
                    out.completed += 1;
                }
            }
            return Ok(Ok(out));
        }
    }

    let mut seen = HashSet::new();
    for k in 0..SAMPLED_SYSTEMS {
        let mut mates = Vec::with_capacity(layers.len());
        for (j, g) in layers.iter().enumerate() {
            let pm = match &all {
                Some(a) => a[j][rng.gen_range(0..a[j].len())].clone(),
                None => random_pm(g, &mut rng).ok_or_else(|| Error::InternalInvariant("layer lost its perfect matching".into()))?,
            };
            mates.push(pm);
        }
        if !seen.insert(mates.clone()) {
            continue;
        }
        let sys = path_system_from_matchings(part, &mates)?;
        out.checked += 1;
        if complete(d, part, &sys, seed::derive(seed, "sample", k as u64))? {
            out.completed += 1;
        }
    }
    out.systems_seen = seen.len();
    // distinct systems that completed give distinct cycles
    out.cycles = out.completed as u128;
    Ok(Ok(out))
}

/// Lower-bound certificate for the number of Hamilton cycles of `d`.
pub fn count_certify(d: &Digraph, params: &ExperimentParams, seed: u64, partitions_sample: usize) -> Result<CountCertificate> {
    let start = Instant::now();
    let n = d.n();
    if n != params.n {
        return Err(Error::InvalidInput(format!("digraph has {n} vertices, params expect {}", params.n)));
    }
    let mut rng = seed::rng(seed::derive(seed, "v0", 0));
    let mut verts: Vec<usize> = (0..n).collect();
    verts.shuffle(&mut rng);
    let mut v0 = verts[..params.s].to_vec();
    v0.sort_unstable();

    // distinct partitions sharing V₀
    let mut keys = HashSet::new();
    let mut parts = Vec::new();
    let mut attempt = 0u64;
    while parts.len() < partitions_sample && attempt < 4 * partitions_sample as u64 + 16 {
        let s = seed::derive(seed, "partition", attempt);
        attempt += 1;
        let part = PartitionScheme::with_fixed_v0(n, params.ell, &v0, s)?;
        let key: Vec<usize> = (0..n).map(|v| part.block_index(v)).collect();
        if keys.insert(key) {
            parts.push((s, part));
        }
    }

    let results = parts
        .par_iter()
        .enumerate()
        .map(|(i, (s, part))| count_partition(d, part, params.enum_cap, i, *s))
        .collect::<Result<Vec<_>>>()?;
    let mut partitions = Vec::new();
    let mut discarded = Vec::new();
    for r in results {
        match r {
            Ok(pc) => partitions.push(pc),
            Err(why) => discarded.push(why),
        }
    }

    let certified: u128 = partitions.iter().map(|p| p.cycles).sum();
    let ln_certified = (certified > 0).then(|| (certified as f64).ln());
    let (m, s, ell) = (params.m, params.s, params.ell);
    let ln_partitions_total = ln_factorial(n - s) - ell as f64 * ln_factorial(m);
    let ln_extrapolated = if parts.is_empty() || certified == 0 {
        None
    } else {
        Some(ln_partitions_total + (certified as f64 / parts.len() as f64).ln())
    };
    let checked: usize = partitions.iter().map(|p| p.checked).sum();
    let completed: usize = partitions.iter().map(|p| p.completed).sum();
    let ln_reference = ln_factorial(n) + n as f64 * params.p.ln();
    let exact_count = if n <= COUNT_LIMIT { Some(count_hamilton_exact(d)?) } else { None };
    let ln_exact = exact_count.filter(|&c| c > 0).map(|c| (c as f64).ln());
    Ok(CountCertificate {
        params: params.clone(),
        seed,
        v0,
        all_exact: partitions.iter().all(|p| p.exact),
        partitions,
        discarded,
        ln_certified,
        ln_partitions_total,
        ln_extrapolated,
        completion_rate: if checked == 0 { 0.0 } else { completed as f64 / checked as f64 },
        ln_reference,
        exact_count,
        ln_exact,
        gap_per_vertex: ln_exact.map(|l| (l - ln_reference) / n as f64),
        wall_ms: start.elapsed().as_millis(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_all_matchings_of_complete_layer() {
        let g = BipartiteGraph::complete(4, 4);
        assert_eq!(enumerate_pms(&g, 100).unwrap().len(), 24);
        assert!(enumerate_pms(&g, 10).is_none());
    }

    #[test]
    fn random_pm_is_perfect_and_inside() {
        let g = BipartiteGraph::even_cycle(6);
        let mut rng = seed::rng(3);
        let pm = random_pm(&g, &mut rng).unwrap();
        assert!(pm.iter().enumerate().all(|(a, &b)| g.has_edge(a, b)));
    }
}
