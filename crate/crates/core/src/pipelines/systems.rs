//! Matching path systems: one perfect matching per layer, chained into `m`
//! disjoint paths from `V₁` to `V_ℓ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{complete_to_r_factor, RFactorInstance};
use crate::graph::{path_system_from_matchings, BipartiteGraph, PartitionScheme, PathSystem};
use crate::matching::{hall_decompose, max_regular_factor, MatchingFamily};

/// Edge-disjoint systems for packing.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PackSystems {
    pub systems: Vec<PathSystem>,
    /// Largest number of disjoint perfect matchings in each layer.
    pub layer_max: Vec<usize>,
    /// Systems delivered: the minimum of `layer_max` and the request.
    pub l: usize,
    /// True when some layer could not supply the requested number.
    pub shortfall: bool,
}

/// Systems covering every layer edge, for covering.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverSystems {
    pub systems: Vec<PathSystem>,
    pub l: usize,
    pub r: usize,
    /// `Δ(H_j)` of the leftover graph in each layer.
    pub leftover_max_degree: Vec<usize>,
}

fn mates_of(fam: &MatchingFamily, k: usize) -> Vec<usize> {
    fam.matchings[k]
        .as_permutation()
        .expect("decomposition yields perfect matchings")
        .to_vec()
}

fn chain(v: &PartitionScheme, families: &[MatchingFamily], count: usize, offset: usize) -> Result<Vec<PathSystem>> {
    (0..count)
        .map(|k| {
            let mates: Vec<Vec<usize>> = families.iter().map(|f| mates_of(f, offset + k)).collect();
            path_system_from_matchings(v, &mates)
        })
        .collect()
}

/// Up to `requested` path systems using pairwise disjoint matchings in every layer.
pub fn build_path_systems(
    v: &PartitionScheme,
    layers: &[BipartiteGraph],
    requested: usize,
) -> Result<PackSystems> {
    if layers.len() + 1 != v.ell() {
        return Err(Error::InvalidInput(format!(
            "expected {} layers, got {}",
            v.ell() - 1,
            layers.len()
        )));
    }
    let mut factors = Vec::with_capacity(layers.len());
    for g in layers {
        factors.push(max_regular_factor(g)?);
    }
    let layer_max: Vec<usize> = factors.iter().map(|f| f.0).collect();
    let avail = layer_max.iter().copied().min().unwrap_or(0);
    let l = avail.min(requested);
    if l == 0 {
        return Ok(PackSystems {
            systems: Vec::new(),
            layer_max,
            l: 0,
            shortfall: requested > 0,
        });
    }
    let families = factors
        .iter()
        .map(|(r, f)| hall_decompose(f, *r))
        .collect::<Result<Vec<_>>>()?;
    Ok(PackSystems {
        systems: chain(v, &families, l, 0)?,
        layer_max,
        l,
        shortfall: l < requested,
    })
}

/// Path systems whose interior arcs include every edge of every layer.
///
/// The first `L` systems come from disjoint perfect matchings; the leftover
/// `H_j` of each layer is completed to an `r`-regular graph inside
/// `hosts[j]` and split into `r` more matchings. `r` is the smallest value
/// from `max Δ(H_j)` up to twice that for which every completion exists.
pub fn build_cover_systems(
    v: &PartitionScheme,
    layers: &[BipartiteGraph],
    hosts: &[BipartiteGraph],
) -> Result<CoverSystems> {
    if layers.len() + 1 != v.ell() || hosts.len() != layers.len() {
        return Err(Error::InvalidInput("layer/host count mismatch".into()));
    }
    let mut factors = Vec::with_capacity(layers.len());
    for g in layers {
        factors.push(max_regular_factor(g)?);
    }
    let l = factors.iter().map(|f| f.0).min().unwrap_or(0);
    let mut first = Vec::with_capacity(layers.len());
    let mut leftovers = Vec::with_capacity(layers.len());
    for (g, (r, f)) in layers.iter().zip(&factors) {
        let mut fam = hall_decompose(f, *r)?;
        fam.matchings.truncate(l);
        leftovers.push(g.minus(&fam.union_graph()));
        first.push(fam);
    }
    let leftover_max_degree: Vec<usize> = leftovers.iter().map(BipartiteGraph::max_degree).collect();
    let delta = leftover_max_degree.iter().copied().max().unwrap_or(0);
    let mut systems = chain(v, &first, l, 0)?;
    if delta == 0 {
        return Ok(CoverSystems {
            systems,
            l,
            r: 0,
            leftover_max_degree,
        });
    }
    let mut last_err = None;
    for r in delta..=2 * delta {
        let mut fams = Vec::with_capacity(layers.len());
        let mut ok = true;
        for (h, host) in leftovers.iter().zip(hosts) {
            let inst = RFactorInstance {
                g: host.clone(),
                h: h.clone(),
                r,
            };
            match complete_to_r_factor(&inst) {
                Ok(gp) => fams.push(hall_decompose(&gp.union(h), r)?),
                Err(e @ Error::Infeasible { .. }) => {
                    last_err = Some(e);
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if ok {
            systems.extend(chain(v, &fams, r, 0)?);
            return Ok(CoverSystems {
                systems,
                l,
                r,
                leftover_max_degree,
            });
        }
    }
    Err(last_err.unwrap_or_else(|| Error::InternalInvariant("no completion attempted".into())))
}
