//! Packing edge-disjoint Hamilton cycles.
//!
//! Phase one follows the construction directly: `t` random partitions, arcs
//! split among `t` subdigraphs, and inside each subdigraph `L` path systems
//! from disjoint layer matchings, each closed into a Hamilton cycle through
//! its own share `H_k` of the exterior arcs (uniform labels `h(e) ∈ [L]`).
//! A system whose share is not enough is retried on the subdigraph's
//! exterior arcs that no cycle has used.
//!
//! Residual rounds then repeat the construction on the arcs no cycle has
//! used, with fresh partitions; there the exterior arcs of a subdigraph form
//! one pool consumed cycle by cycle.

use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::assign::{assign_edges, sample_partitions, AssignMode, BalanceReport};
use super::params::ExperimentParams;
use super::report::{audit_disjoint, DisjointAudit};
use super::systems::build_path_systems;
use crate::error::Result;
use crate::graph::{
    classify_edge, contract, layer_bipartite, lift_cycle, verify_cycle, Digraph, EdgeClass, HamCycle,
    PartitionScheme, PathSystem,
};
use crate::hamilton::{find_hamilton, HamOutcome, NotFound, SolverBudget};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExteriorMode {
    /// Each system gets the exterior arcs labelled with its index.
    Labels,
    /// Systems draw, in order, from the exterior arcs not yet used.
    Pool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SubDiagnostics {
    pub round: usize,
    pub index: usize,
    pub interior_arcs: usize,
    pub exterior_arcs: usize,
    /// Maximum number of disjoint perfect matchings in each layer.
    pub layer_max: Vec<usize>,
    pub l: usize,
    pub found: usize,
    /// Systems found only on a retry.
    pub found_on_retry: usize,
    pub retries: usize,
    pub failed: usize,
    pub proven_non_hamiltonian: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PackReport {
    pub params: ExperimentParams,
    pub seed: u64,
    pub cycles: Vec<HamCycle>,
    pub achieved: usize,
    /// `achieved / (n p)`.
    pub ratio_np: f64,
    pub phase1_cycles: usize,
    /// Cycles found in each residual round.
    pub residual_cycles: Vec<usize>,
    pub balance: BalanceReport,
    pub resamples: u32,
    pub retries: usize,
    pub failures: usize,
    pub subs: Vec<SubDiagnostics>,
    pub audit: DisjointAudit,
    pub wall_ms: u128,
}

pub(crate) struct SubOutcome {
    pub cycles: Vec<HamCycle>,
    pub diag: SubDiagnostics,
}

pub(crate) fn solver_budget() -> SolverBudget {
    SolverBudget {
        node_limit: 200_000,
        restart_limit: 30,
        time_hint: None,
        exact_threshold: 40,
    }
}

/// Closes `system` into a Hamilton cycle of `ext ∪ paths` through `V₀`.
pub(crate) fn close_system(
    ext: &Digraph,
    part: &PartitionScheme,
    system: &PathSystem,
    budget: &SolverBudget,
    seed: u64,
) -> Result<std::result::Result<HamCycle, NotFound>> {
    let v0 = part.block(0);
    let c = contract(ext, &system.endpoints(), v0)?;
    match find_hamilton(&c, budget, seed)? {
        HamOutcome::Found(h) => Ok(Ok(lift_cycle(&h, system, v0)?)),
        HamOutcome::NotFound(why) => Ok(Err(why)),
    }
}

/// Exterior arcs of `sub` relative to `part`.
pub(crate) fn exterior_part(sub: &Digraph, part: &PartitionScheme) -> Digraph {
    let mut ext = Digraph::empty(sub.n());
    for (u, v) in sub.arcs() {
        if classify_edge(part, u, v) == EdgeClass::Exterior {
            ext.add_arc(u, v);
        }
    }
    ext
}

fn remove_cycle_arcs(g: &mut Digraph, c: &HamCycle) {
    for (u, v) in c.arcs() {
        g.remove_arc(u, v);
    }
}

/// Runs the packing construction inside one subdigraph.
#[allow(clippy::too_many_arguments)]
pub(crate) fn pack_sub(
    sub: &Digraph,
    part: &PartitionScheme,
    l_cap: Option<usize>,
    mode: ExteriorMode,
    max_retries: u32,
    round: usize,
    index: usize,
    seed: u64,
) -> Result<SubOutcome> {
    let budget = solver_budget();
    let layers: Vec<_> = (1..part.ell()).map(|j| layer_bipartite(sub, part, j)).collect();
    let ext = exterior_part(sub, part);
    let mut diag = SubDiagnostics {
        round,
        index,
        interior_arcs: layers.iter().map(|g| g.edge_count()).sum(),
        exterior_arcs: ext.edge_count(),
        ..Default::default()
    };
    let ps = build_path_systems(part, &layers, l_cap.unwrap_or(usize::MAX))?;
    diag.layer_max = ps.layer_max.clone();
    diag.l = ps.l;
    let l = ps.l;
    let mut cycles = Vec::new();
    let mut pool = ext.clone();
    let mut pending: Vec<usize> = Vec::new();

    match mode {
        ExteriorMode::Labels if l > 0 => {
            let mut rng = seed::rng(seed::derive(seed, "labels", 0));
            let mut shares = vec![Digraph::empty(sub.n()); l];
            for (u, v) in ext.arcs() {
                shares[rng.gen_range(0..l)].add_arc(u, v);
            }
            for (k, sys) in ps.systems.iter().enumerate() {
                match close_system(&shares[k], part, sys, &budget, seed::derive(seed, "close", k as u64))? {
                    Ok(c) => {
                        remove_cycle_arcs(&mut pool, &c);
                        cycles.push(c);
                    }
                    Err(why) => {
                        if why == NotFound::ProvenNonHamiltonian {
                            diag.proven_non_hamiltonian += 1;
                        }
                        pending.push(k);
                    }
                }
            }
        }
        _ => pending.extend(0..l),
    }

    // pooled attempts: retries in label mode, the main pass in pool mode
    for k in pending {
        let sys = &ps.systems[k];
        let attempts = if mode == ExteriorMode::Pool { 1 + max_retries } else { max_retries };
        let mut done = false;
        for a in 0..attempts {
            if mode == ExteriorMode::Labels || a > 0 {
                diag.retries += 1;
            }
            let s = seed::derive(seed, "retry", (k as u64) << 8 | u64::from(a));
            match close_system(&pool, part, sys, &budget, s)? {
                Ok(c) => {
                    remove_cycle_arcs(&mut pool, &c);
                    cycles.push(c);
                    if mode == ExteriorMode::Labels || a > 0 {
                        diag.found_on_retry += 1;
                    }
                    done = true;
                    break;
                }
                Err(NotFound::ProvenNonHamiltonian) => {
                    diag.proven_non_hamiltonian += 1;
                    break;
                }
                Err(NotFound::Exhausted) => {}
            }
        }
        if !done {
            diag.failed += 1;
        }
    }
    diag.found = cycles.len();
    debug_assert!(cycles.iter().all(|c| verify_cycle(sub, c)));
    Ok(SubOutcome { cycles, diag })
}

/// Runs one round: partitions, assignment, and all subdigraphs in parallel.
#[allow(clippy::too_many_arguments)]
pub(crate) fn pack_round(
    d: &Digraph,
    params: &ExperimentParams,
    t: usize,
    mode: ExteriorMode,
    round: usize,
    seed: u64,
) -> Result<(Vec<SubOutcome>, BalanceReport, u32)> {
    let (parts, balance, resamples) = sample_partitions(
        params.n,
        params.ell,
        params.s,
        t,
        seed::derive(seed, "partitions", 0),
        params.enforce_balance && round == 0,
        params.max_resamples,
    )?;
    let (_, subs) = assign_edges(d, &parts, AssignMode::Pack, params.alpha, seed::derive(seed, "assign", 0))?;
    let outcomes = subs
        .par_iter()
        .zip(parts.par_iter())
        .enumerate()
        .map(|(i, (sub, part))| {
            pack_sub(
                sub,
                part,
                params.l_cap,
                mode,
                params.max_retries,
                round,
                i,
                seed::derive(seed, "sub", i as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((outcomes, balance, resamples))
}

/// Edge-disjoint Hamilton cycles of `d`.
pub fn pack(d: &Digraph, params: &ExperimentParams, seed: u64) -> Result<PackReport> {
    let start = Instant::now();
    let mut cycles: Vec<HamCycle> = Vec::new();
    let mut subs = Vec::new();
    let (outcomes, balance, resamples) = pack_round(d, params, params.t, ExteriorMode::Labels, 0, seed::derive(seed, "round", 0))?;
    for o in outcomes {
        cycles.extend(o.cycles);
        subs.push(o.diag);
    }
    let phase1_cycles = cycles.len();

    let mut residual = d.clone();
    for c in &cycles {
        remove_cycle_arcs(&mut residual, c);
    }
    let mut residual_cycles = Vec::new();
    for round in 1..=params.residual_rounds {
        let (outcomes, _, _) = pack_round(
            &residual,
            params,
            params.residual_t,
            ExteriorMode::Pool,
            round,
            seed::derive(seed, "round", round as u64),
        )?;
        let mut found = 0;
        for o in outcomes {
            for c in &o.cycles {
                remove_cycle_arcs(&mut residual, c);
            }
            found += o.cycles.len();
            cycles.extend(o.cycles);
            subs.push(o.diag);
        }
        residual_cycles.push(found);
        if found == 0 {
            break;
        }
    }

    let audit = audit_disjoint(d, &cycles);
    let np = params.n as f64 * params.p;
    Ok(PackReport {
        params: params.clone(),
        seed,
        achieved: cycles.len(),
        ratio_np: cycles.len() as f64 / np,
        phase1_cycles,
        residual_cycles,
        balance,
        resamples,
        retries: subs.iter().map(|s| s.retries).sum(),
        failures: subs.iter().map(|s| s.failed).sum(),
        subs,
        cycles,
        audit,
        wall_ms: start.elapsed().as_millis(),
    })
}
