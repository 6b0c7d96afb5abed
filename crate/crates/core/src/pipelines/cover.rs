//! Covering every arc with Hamilton cycles.
//!
//! Phase one: `t` random partitions, each arc handed to one subdigraph in
//! which it is interior, every subdigraph also seeing all arcs of `D` that
//! are exterior for its partition. Per subdigraph, `L` disjoint layer
//! matchings plus an `r`-regular completion of the leftover give `L + r`
//! path systems covering its interior arcs, and each is closed through the
//! shared exterior arcs. Interior degrees are capped first so that the
//! completion stays feasible; arcs over the cap wait.
//!
//! Arcs still uncovered afterwards are handled by further rounds, each with
//! one partition built so that many of those arcs are interior.

use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::assign::{assign_edges, sample_partitions, AssignMode, BalanceReport};
use super::pack::{close_system, exterior_part, solver_budget};
use super::params::ExperimentParams;
use super::report::{audit_cover, CoverAudit};
use super::systems::build_cover_systems;
use crate::error::{Error, Result};
use crate::graph::{
    classify_edge, layer_bipartite, make_partition, BipartiteGraph, Digraph, EdgeClass, HamCycle,
    PartitionScheme,
};
use crate::seed;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CoverSubDiagnostics {
    pub round: usize,
    pub index: usize,
    pub interior_arcs: usize,
    /// Degree cap applied to the targets in each layer.
    pub cap: usize,
    pub l: usize,
    pub r: usize,
    pub leftover_max_degree: Vec<usize>,
    /// The `r`-factor completion failed for every `r` tried.
    pub infeasible: bool,
    pub found: usize,
    pub retries: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverReport {
    pub params: ExperimentParams,
    pub seed: u64,
    pub cycles: Vec<HamCycle>,
    pub achieved: usize,
    /// `achieved / (n p)`.
    pub ratio_np: f64,
    pub phase1_cycles: usize,
    pub uncovered_after_phase1: usize,
    pub extra_rounds: usize,
    pub balance: BalanceReport,
    pub retries: usize,
    pub failures: usize,
    pub infeasible_completions: usize,
    pub subs: Vec<CoverSubDiagnostics>,
    pub audit: CoverAudit,
    pub wall_ms: u128,
}

struct SubOutcome {
    cycles: Vec<HamCycle>,
    diag: CoverSubDiagnostics,
}

/// Interior arcs of `sub` relative to `part`.
fn interior_part(sub: &Digraph, part: &PartitionScheme) -> Digraph {
    let mut g = Digraph::empty(sub.n());
    for (u, v) in sub.arcs() {
        if classify_edge(part, u, v) == EdgeClass::Interior {
            g.add_arc(u, v);
        }
    }
    g
}

/// Interior degree cap as a fraction of the smallest host layer degree.
pub const CAP_FRACTION: f64 = 0.5;

/// A subgraph of `g` with all degrees at most `cap`, greedy in random order.
fn capped(g: &BipartiteGraph, cap: usize, rng: &mut seed::Rng) -> BipartiteGraph {
    let mut edges: Vec<(usize, usize)> = g.edges().collect();
    edges.shuffle(rng);
    let mut out = BipartiteGraph::new(g.left_size(), g.right_size());
    for (a, b) in edges {
        if out.left_degree(a) < cap && out.right_degree(b) < cap {
            out.add_edge(a, b);
        }
    }
    out
}

/// A partition in which as many of `arcs` as possible go from `V_j` to `V_{j+1}`.
///
/// Arcs are taken in random order and their endpoints placed greedily; the
/// vertices left over fill the remaining places at random.
pub fn targeted_partition(n: usize, ell: usize, s: usize, arcs: &[(usize, usize)], seed: u64) -> Result<PartitionScheme> {
    let base = make_partition(n, ell, s, seed)?;
    let m = base.m();
    let mut rng = seed::rng(seed::derive(seed, "targeted", 0));
    let mut arcs = arcs.to_vec();
    arcs.shuffle(&mut rng);
    let mut block = vec![usize::MAX; n];
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); ell + 1];
    for (u, v) in arcs {
        match (block[u], block[v]) {
            (usize::MAX, usize::MAX) => {
                let open: Vec<usize> = (1..ell)
                    .filter(|&j| blocks[j].len() < m && blocks[j + 1].len() < m)
                    .collect();
                if let Some(&j) = open.choose(&mut rng) {
                    block[u] = j;
                    block[v] = j + 1;
                    blocks[j].push(u);
                    blocks[j + 1].push(v);
                }
            }
            (j, usize::MAX) if (1..ell).contains(&j) && blocks[j + 1].len() < m => {
                block[v] = j + 1;
                blocks[j + 1].push(v);
            }
            (usize::MAX, j) if (2..=ell).contains(&j) && blocks[j - 1].len() < m => {
                block[u] = j - 1;
                blocks[j - 1].push(u);
            }
            _ => {}
        }
    }
    let mut rest: Vec<usize> = (0..n).filter(|&v| block[v] == usize::MAX).collect();
    rest.shuffle(&mut rng);
    for block in blocks.iter_mut().skip(1) {
        while block.len() < m {
            block.push(rest.pop().expect("sizes add up"));
        }
    }
    blocks[0] = rest;
    PartitionScheme::from_blocks(&blocks)
}

/// Covers arcs of `targets` (all interior for `part`) with Hamilton cycles of `d`.
///
/// Each layer's targets are first cut down to maximum degree `c`, half the
/// smallest host degree; `c` is halved again while the completion is
/// infeasible. Targets above the cap are left for later rounds.
#[allow(clippy::too_many_arguments)]
fn cover_sub(
    d: &Digraph,
    part: &PartitionScheme,
    targets: &Digraph,
    covered: &Digraph,
    max_retries: u32,
    round: usize,
    index: usize,
    seed: u64,
) -> Result<SubOutcome> {
    let hosts: Vec<BipartiteGraph> = (1..part.ell()).map(|j| layer_bipartite(d, part, j)).collect();
    let full: Vec<BipartiteGraph> = (1..part.ell()).map(|j| layer_bipartite(targets, part, j)).collect();
    let mut diag = CoverSubDiagnostics {
        round,
        index,
        interior_arcs: targets.edge_count(),
        ..Default::default()
    };
    let host_min = hosts.iter().map(BipartiteGraph::min_degree).min().unwrap_or(0);
    let mut cap = ((CAP_FRACTION * host_min as f64) as usize).max(1);
    let mut rng = seed::rng(seed::derive(seed, "cap", 0));
    let cs = loop {
        let layers: Vec<BipartiteGraph> = full.iter().map(|g| capped(g, cap, &mut rng)).collect();
        match build_cover_systems(part, &layers, &hosts) {
            Ok(cs) => break cs,
            Err(Error::Infeasible { .. }) if cap > 1 => cap /= 2,
            Err(Error::Infeasible { .. }) => {
                diag.infeasible = true;
                return Ok(SubOutcome {
                    cycles: Vec::new(),
                    diag,
                });
            }
            Err(e) => return Err(e),
        }
    };
    diag.cap = cap;
    diag.l = cs.l;
    diag.r = cs.r;
    diag.leftover_max_degree = cs.leftover_max_degree.clone();

    let budget = solver_budget();
    let ext = exterior_part(d, part);
    let mut fresh = ext.clone();
    for (u, v) in covered.arcs() {
        fresh.remove_arc(u, v);
    }
    let mut cycles = Vec::new();
    for (k, sys) in cs.systems.iter().enumerate() {
        let mut done = false;
        // first try only exterior arcs nobody has covered yet, then all of them
        for a in 0..=max_retries + 1 {
            let host = if a == 0 { &fresh } else { &ext };
            if a > 1 {
                diag.retries += 1;
            }
            let s = seed::derive(seed, "close", (k as u64) << 8 | u64::from(a));
            if let Ok(c) = close_system(host, part, sys, &budget, s)? {
                for (u, v) in c.arcs() {
                    fresh.remove_arc(u, v);
                }
                cycles.push(c);
                done = true;
                break;
            }
        }
        if !done {
            diag.failed += 1;
        }
    }
    diag.found = cycles.len();
    Ok(SubOutcome { cycles, diag })
}

/// Hamilton cycles of `d` covering every arc.
///
/// Returns [`Error::CoverageFailure`] with the missed arcs if some remain
/// uncovered after all rounds.
pub fn cover(d: &Digraph, params: &ExperimentParams, seed: u64) -> Result<CoverReport> {
    let report = cover_report(d, params, seed)?;
    if !report.audit.uncovered.is_empty() {
        return Err(Error::CoverageFailure {
            uncovered: report.audit.uncovered,
        });
    }
    Ok(report)
}

/// Like [`cover`] but returns the report even when arcs remain uncovered.
pub fn cover_report(d: &Digraph, params: &ExperimentParams, seed: u64) -> Result<CoverReport> {
    let start = Instant::now();
    let n = d.n();
    let (parts, balance, _) = sample_partitions(
        n,
        params.ell,
        params.s,
        params.t,
        seed::derive(seed, "partitions", 0),
        params.enforce_balance,
        params.max_resamples,
    )?;
    let (_, subs) = assign_edges(d, &parts, AssignMode::Cover, params.alpha, seed::derive(seed, "assign", 0))?;
    let none = Digraph::empty(n);
    let outcomes = subs
        .par_iter()
        .zip(parts.par_iter())
        .enumerate()
        .map(|(i, (sub, part))| {
            let interior = interior_part(sub, part);
            cover_sub(
                d,
                part,
                &interior,
                &none,
                params.max_retries,
                0,
                i,
                seed::derive(seed, "sub", i as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cycles = Vec::new();
    let mut diags = Vec::new();
    let mut covered = Digraph::empty(n);
    for o in outcomes {
        for c in &o.cycles {
            for (u, v) in c.arcs() {
                covered.add_arc(u, v);
            }
        }
        cycles.extend(o.cycles);
        diags.push(o.diag);
    }
    let phase1_cycles = cycles.len();
    let uncovered_count = |covered: &Digraph| d.edge_count() - covered.edge_count();
    let uncovered_after_phase1 = uncovered_count(&covered);

    let mut extra_rounds = 0;
    for round in 1..=params.residual_rounds {
        if uncovered_count(&covered) == 0 {
            break;
        }
        extra_rounds += 1;
        let rs = seed::derive(seed, "round", round as u64);
        let open: Vec<(usize, usize)> = d.arcs().filter(|&(u, v)| !covered.has_arc(u, v)).collect();
        let part = targeted_partition(n, params.ell, params.s, &open, seed::derive(rs, "partition", 0))?;
        let mut interior = Digraph::empty(n);
        for (u, v) in d.arcs() {
            if !covered.has_arc(u, v) && classify_edge(&part, u, v) == EdgeClass::Interior {
                interior.add_arc(u, v);
            }
        }
        if interior.edge_count() == 0 {
            continue;
        }
        let o = cover_sub(d, &part, &interior, &covered, params.max_retries, round, 0, seed::derive(rs, "sub", 0))?;
        for c in &o.cycles {
            for (u, v) in c.arcs() {
                covered.add_arc(u, v);
            }
        }
        cycles.extend(o.cycles);
        diags.push(o.diag);
    }

    let audit = audit_cover(d, &cycles);
    let np = n as f64 * params.p;
    Ok(CoverReport {
        params: params.clone(),
        seed,
        achieved: cycles.len(),
        ratio_np: cycles.len() as f64 / np,
        phase1_cycles,
        uncovered_after_phase1,
        extra_rounds,
        balance,
        retries: diags.iter().map(|s| s.retries).sum(),
        failures: diags.iter().map(|s| s.failed).sum(),
        infeasible_completions: diags.iter().filter(|s| s.infeasible).count(),
        subs: diags,
        cycles,
        audit,
        wall_ms: start.elapsed().as_millis(),
    })
}
