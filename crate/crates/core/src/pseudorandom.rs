//! Checkers for `(n, λ, p)`-pseudo-randomness, the sufficient conditions for
//! Hamiltonicity used on contracted digraphs, the packing entry point for
//! pseudo-random digraphs, and a statistical test of the two auxiliary
//! lemmas behind it.
//!
//! Logarithms are natural. Sampled verdicts are never reported as proofs.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::graph::{contract, layer_bipartite, make_partition, sample_sub, BipartiteGraph, Digraph, PairList};
use crate::hamilton::{find_hamilton, HamOutcome, SolverBudget};
use crate::matching::max_regular_factor;
use crate::pipelines::{pack, parameter_policy, ExperimentParams, PackReport, PolicyOptions, Task};
use crate::seed;

/// Exact rational exponent of `log n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exponent {
    pub num: u32,
    pub den: u32,
    pub role: &'static str,
}

impl Exponent {
    pub fn value(&self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }

    /// `(ln n)^self`.
    pub fn pow_log(&self, n: usize) -> f64 {
        (n as f64).ln().powf(self.value())
    }
}

/// The proof-tuned exponents, kept in one place.
pub mod exponents {
    use super::Exponent;

    /// Edge bound for small sets in the definition: `e(X) ≤ (1 − λ)|X| log^{8.02} n`.
    pub const P2_EDGES: Exponent = Exponent { num: 401, den: 50, role: "P2 edge bound" };
    /// Size range for that bound: `|X| ≤ 4 log⁸ n / p`.
    pub const P2_SIZE: Exponent = Exponent { num: 8, den: 1, role: "P2 size range" };
    /// Smallest sets whose edge counts are controlled: `|X|, |Y| ≥ log^{1.1} n / p`.
    pub const P3_SIZE: Exponent = Exponent { num: 11, den: 10, role: "P3 size range" };
    /// Edge bound in the Hamiltonicity criterion: `e(X) ≤ |X| log^{2.1} n`.
    pub const P2_STAR_EDGES: Exponent = Exponent { num: 21, den: 10, role: "P2* edge bound" };
    /// Size range in the Hamiltonicity criterion: `|X| ≤ log² n / p`.
    pub const P2_STAR_SIZE: Exponent = Exponent { num: 2, den: 1, role: "P2* size range" };
    /// Slack exponent used when passing from `D` to the contracted digraph.
    pub const BRIDGE_EDGES: Exponent = Exponent { num: 161, den: 20, role: "contraction bridge" };
    /// Small-set bound inside a sparsified layer: `e(X, Y) ≤ min(|X|, |Y|) log^{2.05} n`.
    pub const LAYER_SMALL: Exponent = Exponent { num: 41, den: 20, role: "layer small-set bound" };
    /// `p' = p / log⁶ n`.
    pub const P_PRIME: Exponent = Exponent { num: 6, den: 1, role: "p' scaling" };

    pub const ALL: [Exponent; 8] = [
        P2_EDGES,
        P2_SIZE,
        P3_SIZE,
        P2_STAR_EDGES,
        P2_STAR_SIZE,
        BRIDGE_EDGES,
        LAYER_SMALL,
        P_PRIME,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// `e(X)` above its bound.
    Dense,
    /// `e(X, Y)` above its bound.
    PairHigh,
    /// `e(X, Y)` below its bound.
    PairLow,
}

/// Sets violating a condition, with the offending edge count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub edges: usize,
    pub bound: f64,
}

impl Witness {
    /// Recounts the edges on `d` and confirms the violation.
    pub fn revalidate(&self, d: &Digraph) -> bool {
        let n = d.n();
        if self.x.iter().chain(&self.y).any(|&v| v >= n) {
            return false;
        }
        let xs = BitSet::from_iter_with_len(n, self.x.iter().copied());
        let edges = match self.kind {
            WitnessKind::Dense => e_within(d, &self.x, &xs),
            _ => {
                let ys = BitSet::from_iter_with_len(n, self.y.iter().copied());
                if xs.intersection_count(&ys) > 0 {
                    return false;
                }
                e_between(d, &self.x, &ys)
            }
        };
        edges == self.edges
            && match self.kind {
                WitnessKind::PairLow => (edges as f64) < self.bound,
                _ => (edges as f64) > self.bound,
            }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// No sets fall in the size range.
    Vacuous,
    /// Every set checked, or the bound proved for all sets at once.
    ExhaustivePass { method: String },
    /// No violation among `trials` sampled sets.
    SampledPass { trials: usize },
    Violation(Witness),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        !matches!(self, Verdict::Violation(_))
    }

    pub fn is_exhaustive(&self) -> bool {
        matches!(self, Verdict::Vacuous | Verdict::ExhaustivePass { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Out,
    In,
}

/// The degree condition, checked exactly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DegreeCheck {
    pub ok: bool,
    pub lower: f64,
    pub upper: f64,
    pub min_out: usize,
    pub max_out: usize,
    pub min_in: usize,
    pub max_in: usize,
    /// The most extreme offending vertex.
    pub witness: Option<(usize, Direction, usize)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PseudoRandomReport {
    pub n: usize,
    pub lambda: f64,
    pub p: f64,
    pub p1: DegreeCheck,
    pub p2: Verdict,
    pub p3: Verdict,
    /// Size limit for the sparse-set condition.
    pub p2_max_size: f64,
    /// Minimum size for the edge-distribution condition.
    pub p3_min_size: f64,
}

impl PseudoRandomReport {
    pub fn passed(&self) -> bool {
        self.p1.ok && self.p2.passed() && self.p3.passed()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HamiltonicityReport {
    pub n: usize,
    pub lambda: f64,
    pub p: f64,
    pub p1: DegreeCheck,
    pub p2_star: Verdict,
    pub p3_star: Verdict,
    pub lambda_in_range: bool,
    /// `np ≥ log⁸ n`, a desk stand-in for the asymptotic density hypothesis.
    pub density_ok: bool,
    pub predicts_hamiltonian: bool,
    /// Outcome of a direct search, when requested.
    pub hamiltonian_found: Option<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckBudget {
    /// Sampled sets (or pairs) per condition.
    pub trials: usize,
    /// Enumerate exhaustively when at most this many sets are in range.
    pub exhaustive_limit: u64,
    pub seed: u64,
    /// Run the Hamilton solver to confirm a positive prediction.
    pub confirm: bool,
}

impl Default for CheckBudget {
    fn default() -> Self {
        CheckBudget {
            trials: 10_000,
            exhaustive_limit: 1 << 20,
            seed: 0,
            confirm: false,
        }
    }
}

fn e_within(d: &Digraph, x: &[usize], xs: &BitSet) -> usize {
    x.iter().map(|&v| d.out_row(v).intersection_count(xs)).sum()
}

fn e_between(d: &Digraph, x: &[usize], ys: &BitSet) -> usize {
    x.iter().map(|&v| d.out_row(v).intersection_count(ys)).sum()
}

pub fn degree_check(d: &Digraph, lambda: f64, p: f64) -> DegreeCheck {
    let n = d.n();
    let np = n as f64 * p;
    let (lower, upper) = ((1.0 - lambda) * np, (1.0 + lambda) * np);
    let mut c = DegreeCheck {
        ok: true,
        lower,
        upper,
        min_out: usize::MAX,
        max_out: 0,
        min_in: usize::MAX,
        max_in: 0,
        witness: None,
    };
    let mut worst = 0.0;
    for v in 0..n {
        for (dir, deg) in [(Direction::Out, d.out_degree(v)), (Direction::In, d.in_degree(v))] {
            match dir {
                Direction::Out => {
                    c.min_out = c.min_out.min(deg);
                    c.max_out = c.max_out.max(deg);
                }
                Direction::In => {
                    c.min_in = c.min_in.min(deg);
                    c.max_in = c.max_in.max(deg);
                }
            }
            let g = deg as f64;
            let excess = (lower - g).max(g - upper);
            if excess > 0.0 && (c.witness.is_none() || excess > worst) {
                worst = excess;
                c.witness = Some((v, dir, deg));
            }
        }
    }
    c.ok = c.witness.is_none();
    c
}

fn binom_sum(n: usize, k: usize, limit: u64) -> Option<u64> {
    let mut total = 0u64;
    let mut c = 1u64;
    for i in 1..=k.min(n) {
        c = c.checked_mul((n - i + 1) as u64)? / i as u64;
        total = total.checked_add(c)?;
        if total > limit {
            return None;
        }
    }
    Some(total)
}

/// `e(X) ≤ per_vertex · |X|` for all `X` with `|X| ≤ max_size`.
pub fn check_sparse_sets(d: &Digraph, max_size: f64, per_vertex: f64, budget: &CheckBudget) -> Verdict {
    let n = d.n();
    let k = (max_size.floor().max(0.0) as usize).min(n);
    if k == 0 {
        return Verdict::Vacuous;
    }
    let max_out = (0..n).map(|v| d.out_degree(v)).max().unwrap_or(0);
    // e(X) ≤ |X| · min(|X| − 1, Δ⁺)
    if ((k - 1).min(max_out) as f64) <= per_vertex {
        return Verdict::ExhaustivePass {
            method: "degree bound".into(),
        };
    }
    if let Some(total) = binom_sum(n, k, budget.exhaustive_limit) {
        let mut x = Vec::new();
        if let Some(w) = enumerate_dense(d, k, per_vertex, 0, &mut x) {
            return Verdict::Violation(w);
        }
        return Verdict::ExhaustivePass {
            method: format!("enumerated {total} sets"),
        };
    }
    let mut rng = seed::rng(seed::derive(budget.seed, "sparse", 0));
    for _ in 0..budget.trials {
        let size = rng.gen_range(1..=k);
        let x = greedy_dense(d, size, &mut rng);
        let xs = BitSet::from_iter_with_len(n, x.iter().copied());
        let e = e_within(d, &x, &xs);
        let bound = per_vertex * x.len() as f64;
        if e as f64 > bound {
            let mut x = x;
            x.sort_unstable();
            return Verdict::Violation(Witness {
                kind: WitnessKind::Dense,
                x,
                y: Vec::new(),
                edges: e,
                bound,
            });
        }
    }
    Verdict::SampledPass { trials: budget.trials }
}

fn enumerate_dense(d: &Digraph, k: usize, per_vertex: f64, from: usize, x: &mut Vec<usize>) -> Option<Witness> {
    if !x.is_empty() {
        let xs = BitSet::from_iter_with_len(d.n(), x.iter().copied());
        let e = e_within(d, x, &xs);
        let bound = per_vertex * x.len() as f64;
        if e as f64 > bound {
            return Some(Witness {
                kind: WitnessKind::Dense,
                x: x.clone(),
                y: Vec::new(),
                edges: e,
                bound,
            });
        }
    }
    if x.len() == k {
        return None;
    }
    for v in from..d.n() {
        x.push(v);
        let w = enumerate_dense(d, k, per_vertex, v + 1, x);
        x.pop();
        if w.is_some() {
            return w;
        }
    }
    None
}

/// A set grown from a random vertex by repeatedly adding the best-connected candidate.
fn greedy_dense(d: &Digraph, size: usize, rng: &mut seed::Rng) -> Vec<usize> {
    let n = d.n();
    let mut x = vec![rng.gen_range(0..n)];
    let mut xs = BitSet::from_iter_with_len(n, x.iter().copied());
    while x.len() < size {
        let mut best = None;
        for _ in 0..32 {
            // neighbours of a random member are the likely dense extensions
            let u = x[rng.gen_range(0..x.len())];
            let pool = if rng.gen_bool(0.5) { d.out_row(u) } else { d.in_row(u) };
            let c = pool.count();
            let v = if c == 0 || rng.gen_bool(0.1) {
                rng.gen_range(0..n)
            } else {
                pool.iter().nth(rng.gen_range(0..c)).expect("index below count")
            };
            if xs.contains(v) {
                continue;
            }
            let gain = d.out_row(v).intersection_count(&xs) + d.in_row(v).intersection_count(&xs);
            if best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, v));
            }
        }
        let v = match best {
            Some((_, v)) => v,
            None => match (0..n).find(|&v| !xs.contains(v)) {
                Some(v) => v,
                None => break,
            },
        };
        x.push(v);
        xs.insert(v);
    }
    x
}

/// Bounds on `e(X, Y)` for disjoint `X ⊆ xs_pool`, `Y ⊆ ys_pool` of sizes at least `min_size`.
#[derive(Clone, Debug)]
pub struct PairCondition {
    pub min_size: usize,
    /// `e(X, Y) ≥ low · |X||Y|`.
    pub low: Option<f64>,
    /// `e(X, Y) ≤ high · |X||Y|`.
    pub high: Option<f64>,
}

fn pair_violation(d: &Digraph, x: &[usize], y: &[usize], cond: &PairCondition) -> Option<Witness> {
    let ys = BitSet::from_iter_with_len(d.n(), y.iter().copied());
    let e = e_between(d, x, &ys);
    let area = (x.len() * y.len()) as f64;
    let mk = |kind, bound| {
        let (mut x, mut y) = (x.to_vec(), y.to_vec());
        x.sort_unstable();
        y.sort_unstable();
        Some(Witness { kind, x, y, edges: e, bound })
    };
    if let Some(h) = cond.high {
        if e as f64 > h * area {
            return mk(WitnessKind::PairHigh, h * area);
        }
    }
    if let Some(l) = cond.low {
        if (e as f64) < l * area {
            return mk(WitnessKind::PairLow, l * area);
        }
    }
    None
}

/// Checks a pair condition over disjoint subsets of the given pools.
pub fn check_pairs(d: &Digraph, x_pool: &[usize], y_pool: &[usize], cond: &PairCondition, budget: &CheckBudget) -> Verdict {
    let k = cond.min_size.max(1);
    let shared = {
        let xs = BitSet::from_iter_with_len(d.n(), x_pool.iter().copied());
        let ys = BitSet::from_iter_with_len(d.n(), y_pool.iter().copied());
        xs.intersection_count(&ys)
    };
    let union = x_pool.len() + y_pool.len() - shared;
    if x_pool.len() < k || y_pool.len() < k || union < 2 * k {
        return Verdict::Vacuous;
    }
    // every vertex of the union is in X, in Y or in neither
    if union <= 12 && 3u64.pow(union as u32) <= budget.exhaustive_limit {
        let mut all: Vec<usize> = x_pool.iter().chain(y_pool).copied().collect();
        all.sort_unstable();
        all.dedup();
        let in_x = BitSet::from_iter_with_len(d.n(), x_pool.iter().copied());
        let in_y = BitSet::from_iter_with_len(d.n(), y_pool.iter().copied());
        let mut code = vec![0u8; all.len()];
        loop {
            let x: Vec<usize> = all.iter().zip(&code).filter(|(_, &c)| c == 1).map(|(&v, _)| v).collect();
            let y: Vec<usize> = all.iter().zip(&code).filter(|(_, &c)| c == 2).map(|(&v, _)| v).collect();
            if x.len() >= k && y.len() >= k && x.iter().all(|&v| in_x.contains(v)) && y.iter().all(|&v| in_y.contains(v)) {
                if let Some(w) = pair_violation(d, &x, &y, cond) {
                    return Verdict::Violation(w);
                }
            }
            let mut i = 0;
            while i < code.len() {
                code[i] += 1;
                if code[i] < 3 {
                    break;
                }
                code[i] = 0;
                i += 1;
            }
            if i == code.len() {
                break;
            }
        }
        return Verdict::ExhaustivePass {
            method: format!("enumerated {} labelings", 3u64.pow(union as u32)),
        };
    }

    let n = d.n();
    let verdicts: Vec<Option<Witness>> = (0..budget.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = seed::rng(seed::derive(budget.seed, "pairs", trial as u64));
            let mut xp = x_pool.to_vec();
            xp.shuffle(&mut rng);
            let max_x = (x_pool.len().min(union - k)).max(k);
            let size_x = if rng.gen_bool(0.5) { k } else { rng.gen_range(k..=max_x) };
            let x: Vec<usize> = xp[..size_x.min(xp.len())].to_vec();
            let xs = BitSet::from_iter_with_len(n, x.iter().copied());
            let rest: Vec<usize> = y_pool.iter().copied().filter(|&v| !xs.contains(v)).collect();
            if rest.len() < k {
                return None;
            }
            let size_y = if rng.gen_bool(0.5) { k } else { rng.gen_range(k..=rest.len()) };
            let mut ys = rest;
            match trial % 3 {
                // Y = the vertices receiving the most arcs from X, or the fewest
                0 | 1 => {
                    let mut scored: Vec<(usize, usize)> =
                        ys.iter().map(|&v| (d.in_row(v).intersection_count(&xs), v)).collect();
                    scored.shuffle(&mut rng);
                    if trial % 3 == 0 {
                        scored.sort_by_key(|a| std::cmp::Reverse(a.0));
                    } else {
                        scored.sort_by_key(|a| a.0);
                    }
                    ys = scored.into_iter().map(|(_, v)| v).collect();
                }
                _ => ys.shuffle(&mut rng),
            }
            ys.truncate(size_y);
            pair_violation(d, &x, &ys, cond)
        })
        .collect();
    match verdicts.into_iter().flatten().next() {
        Some(w) => Verdict::Violation(w),
        None => Verdict::SampledPass { trials: budget.trials },
    }
}

/// All three conditions of `(n, λ, p)`-pseudo-randomness.
pub fn check_pseudorandom(d: &Digraph, lambda: f64, p: f64, budget: &CheckBudget) -> Result<PseudoRandomReport> {
    validate(lambda, p)?;
    let n = d.n();
    let p2_max_size = 4.0 * exponents::P2_SIZE.pow_log(n) / p;
    let p3_min_size = exponents::P3_SIZE.pow_log(n) / p;
    let all: Vec<usize> = (0..n).collect();
    let p1 = degree_check(d, lambda, p);
    let p2 = check_sparse_sets(d, p2_max_size, (1.0 - lambda) * exponents::P2_EDGES.pow_log(n), budget);
    let cond = PairCondition {
        min_size: p3_min_size.ceil() as usize,
        low: Some((1.0 - lambda) * p),
        high: Some((1.0 + lambda) * p),
    };
    let p3 = check_pairs(d, &all, &all, &cond, budget);
    Ok(PseudoRandomReport {
        n,
        lambda,
        p,
        p1,
        p2,
        p3,
        p2_max_size,
        p3_min_size,
    })
}

fn validate(lambda: f64, p: f64) -> Result<()> {
    if !(0.0..1.0).contains(&lambda) || !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("need 0 ≤ λ < 1 and 0 < p ≤ 1, got λ = {lambda}, p = {p}")));
    }
    Ok(())
}

/// The sufficient conditions for Hamiltonicity: degrees, sparse small sets,
/// and no overly dense pairs of large sets.
pub fn check_hamiltonicity_conditions(d: &Digraph, lambda: f64, p: f64, budget: &CheckBudget) -> Result<HamiltonicityReport> {
    validate(lambda, p)?;
    let n = d.n();
    let all: Vec<usize> = (0..n).collect();
    let p1 = degree_check(d, lambda, p);
    let p2_star = check_sparse_sets(
        d,
        exponents::P2_STAR_SIZE.pow_log(n) / p,
        exponents::P2_STAR_EDGES.pow_log(n),
        budget,
    );
    let cond = PairCondition {
        min_size: (exponents::P3_SIZE.pow_log(n) / p).ceil() as usize,
        low: None,
        high: Some((1.0 + lambda) * p),
    };
    let p3_star = check_pairs(d, &all, &all, &cond, budget);
    let lambda_in_range = lambda > 0.0 && lambda < 0.1;
    let density_ok = n as f64 * p >= exponents::P2_SIZE.pow_log(n);
    let predicts = p1.ok && p2_star.passed() && p3_star.passed() && lambda_in_range && density_ok;
    let hamiltonian_found = if budget.confirm {
        let out = find_hamilton(d, &SolverBudget::default(), seed::derive(budget.seed, "confirm", 0))?;
        Some(matches!(out, HamOutcome::Found(_)))
    } else {
        None
    };
    Ok(HamiltonicityReport {
        n,
        lambda,
        p,
        p1,
        p2_star,
        p3_star,
        lambda_in_range,
        density_ok,
        predicts_hamiltonian: predicts,
        hamiltonian_found,
    })
}

/// Edge density `e(D) / (n(n − 1))`.
pub fn density(d: &Digraph) -> f64 {
    let n = d.n() as f64;
    d.edge_count() as f64 / (n * (n - 1.0)).max(1.0)
}

/// Edge-disjoint Hamilton cycles of a pseudo-random digraph.
///
/// Uses the packing pipeline with the pseudo-random parameter policy, in
/// which matchings per layer are capped at `(1 − 4λ) m p p_in`. The
/// pseudo-randomness precondition is not enforced here; run
/// [`check_pseudorandom`] to see whether it holds.
pub fn pack_pseudorandom(d: &Digraph, lambda: f64, seed: u64) -> Result<PackReport> {
    pack_pseudorandom_with(d, lambda, &PolicyOptions::default(), seed)
}

pub fn pack_pseudorandom_with(d: &Digraph, lambda: f64, opts: &PolicyOptions, seed: u64) -> Result<PackReport> {
    let mut opts = opts.clone();
    opts.lambda = Some(lambda);
    let params = parameter_policy(d.n(), density(d), Task::PackPseudo, &opts)?;
    pack(d, &params, seed)
}

/// Pass counts for one property over all trials.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PropertyRate {
    pub name: String,
    pub passed: usize,
    pub trials: usize,
    /// Passes that rest on sampling rather than a full check.
    pub sampled: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lambda: f64,
    pub p: f64,
    pub p_prime: f64,
    pub p_in: f64,
    pub ell: usize,
    pub s: usize,
    pub m: usize,
    pub trials: usize,
    /// Degree, sparse-set and dense-pair properties of the contracted digraph.
    pub contracted: Vec<PropertyRate>,
    /// Edge distribution, small sets, degrees and the matching count of a sparsified layer.
    pub layer: Vec<PropertyRate>,
}

fn tally(rates: &mut [PropertyRate], results: &[Vec<(bool, bool)>]) {
    for r in results {
        for (rate, &(ok, sampled)) in rates.iter_mut().zip(r) {
            rate.trials += 1;
            if ok {
                rate.passed += 1;
                if sampled {
                    rate.sampled += 1;
                }
            }
        }
    }
}

fn verdict_bits(v: &Verdict) -> (bool, bool) {
    (v.passed(), matches!(v, Verdict::SampledPass { .. }))
}

/// Layer `F_j` as a digraph on `2m` vertices, left side first.
fn layer_digraph(b: &BipartiteGraph) -> Digraph {
    let m = b.left_size();
    let mut d = Digraph::empty(2 * m);
    for (a, c) in b.edges() {
        d.add_arc(a, m + c);
    }
    d
}

/// Minimum degree into the next block, recounted from the digraph.
pub fn layer_min_degree(d: &Digraph, part: &crate::graph::PartitionScheme, j: usize) -> usize {
    let next = BitSet::from_iter_with_len(d.n(), part.block(j + 1).iter().copied());
    part.block(j)
        .iter()
        .map(|&v| d.out_row(v).intersection_count(&next))
        .min()
        .unwrap_or(0)
}

/// Per-trial pass flags: contracted-digraph checks, then layer checks.
type TrialFlags = (Vec<(bool, bool)>, Vec<(bool, bool)>);

/// Builds the random objects of the two auxiliary lemmas `trials` times and
/// checks each stated property. A statistical test, not a proof.
///
/// Contracted digraph: keep each arc with probability `p'/p`, take a random
/// partition and a random set of `m` pairs in `V₁ × V_ℓ`, contract, then
/// check degrees within `(1 ± 3λ)(s + m)p'`, sparse sets
/// `e(X) ≤ |X| log^{2.1} n` and pairs `e(X, Y) ≤ (1 + 2λ)|X||Y|p'`.
///
/// Layer: keep interior arcs with probability `p_in`, then in every layer
/// check `e(X, Y) = (1 ± 2λ)|X||Y| p p_in` for large sets, the small-set
/// bound, degrees `≥ (1 − 2λ) m p p_in`, and at least `(1 − 4λ) m p p_in`
/// disjoint perfect matchings.
pub fn validate_auxiliary_lemmas(
    d: &Digraph,
    lambda: f64,
    params: &ExperimentParams,
    trials: usize,
    seed: u64,
) -> Result<LemmaReport> {
    let p = params.p;
    validate(lambda, p)?;
    let n = d.n();
    let (ell, s, m) = (params.ell, params.s, params.m);
    let p_prime = params.p_prime;
    let p_in = params.p_in;
    let lnn = (n as f64).ln();
    let budget_for = |t: u64| CheckBudget {
        trials: 200,
        exhaustive_limit: 1 << 16,
        seed: seed::derive(seed, "lemma-budget", t),
        confirm: false,
    };

    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<TrialFlags> {
            let ts = seed::derive(seed, "lemma-trial", t as u64);
            let q = (p_prime / p).min(1.0);
            let c = sample_sub(d, |_, _| q, seed::derive(ts, "thin", 0))?;
            let part = make_partition(n, ell, s, seed::derive(ts, "partition", 0))?;
            let mut rng = seed::rng(seed::derive(ts, "pairs", 0));
            let mut heads = part.block(ell).to_vec();
            heads.shuffle(&mut rng);
            let pairs = PairList::new(part.block(1).iter().copied().zip(heads).collect());
            let f0 = contract(&c, &pairs, part.block(0))?;
            let size = (s + m) as f64;
            let a = degree_check(&f0, (3.0 * lambda).min(0.999), p_prime);
            let b = check_sparse_sets(
                &f0,
                size.ln().powi(2) / p_prime,
                exponents::P2_STAR_EDGES.pow_log(n),
                &budget_for(t as u64),
            );
            let all: Vec<usize> = (0..f0.n()).collect();
            let cc = check_pairs(
                &f0,
                &all,
                &all,
                &PairCondition {
                    min_size: (size.ln().powf(exponents::P3_SIZE.value()) / p_prime).ceil() as usize,
                    low: None,
                    high: Some((1.0 + 2.0 * lambda) * p_prime),
                },
                &budget_for(t as u64 + 1),
            );
            let contracted = vec![(a.ok, false), verdict_bits(&b), verdict_bits(&cc)];

            let f = sample_sub(
                d,
                |u, v| if crate::graph::classify_edge(&part, u, v) == crate::graph::EdgeClass::Interior { p_in } else { 0.0 },
                seed::derive(ts, "interior", 0),
            )?;
            let dens = p * p_in;
            let k = (24.0 * lnn / (lambda * lambda * dens)).ceil() as usize;
            let small = exponents::LAYER_SMALL.pow_log(n);
            let need = ((1.0 - 4.0 * lambda) * m as f64 * dens).max(0.0);
            let (mut i_ok, mut i_s, mut ii_ok, mut ii_s, mut iii_ok, mut iv_ok) = (true, false, true, false, true, true);
            for j in 1..ell {
                let b = layer_bipartite(&f, &part, j);
                let ld = layer_digraph(&b);
                let left: Vec<usize> = (0..m).collect();
                let right: Vec<usize> = (m..2 * m).collect();
                let vi = check_pairs(
                    &ld,
                    &left,
                    &right,
                    &PairCondition {
                        min_size: k,
                        low: Some((1.0 - 2.0 * lambda) * dens),
                        high: Some((1.0 + 2.0 * lambda) * dens),
                    },
                    &budget_for(((t as u64) << 8) | j as u64),
                );
                i_ok &= vi.passed();
                i_s |= matches!(vi, Verdict::SampledPass { .. });
                // e(X, Y) ≤ min(|X|, |Y|) · Δ, so a small maximum degree settles it
                let delta = b.max_degree().min(k);
                if delta as f64 > small {
                    ii_ok &= small_pairs_sampled(&b, k, small, seed::derive(ts, "small", j as u64));
                    ii_s = true;
                }
                iii_ok &= (layer_min_degree(&f, &part, j) as f64) >= (1.0 - 2.0 * lambda) * m as f64 * dens;
                iv_ok &= (max_regular_factor(&b)?.0 as f64) >= need;
            }
            let layer = vec![(i_ok, i_s), (ii_ok, ii_s), (iii_ok, false), (iv_ok, false)];
            Ok((contracted, layer))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut contracted: Vec<PropertyRate> = ["degrees", "sparse sets", "dense pairs"]
        .iter()
        .map(|s| PropertyRate { name: (*s).into(), ..Default::default() })
        .collect();
    let mut layer: Vec<PropertyRate> = ["large pairs", "small pairs", "min degree", "perfect matchings"]
        .iter()
        .map(|s| PropertyRate { name: (*s).into(), ..Default::default() })
        .collect();
    let (c, l): (Vec<_>, Vec<_>) = per_trial.into_iter().unzip();
    tally(&mut contracted, &c);
    tally(&mut layer, &l);
    Ok(LemmaReport {
        lambda,
        p,
        p_prime,
        p_in,
        ell,
        s,
        m,
        trials,
        contracted,
        layer,
    })
}

/// Samples dense-looking pairs of size at most `k` and checks `e ≤ min(|X|, |Y|) · bound`.
fn small_pairs_sampled(b: &BipartiteGraph, k: usize, bound: f64, seed: u64) -> bool {
    let mut rng = seed::rng(seed);
    let m = b.left_size();
    for _ in 0..200 {
        let kx = rng.gen_range(1..=k.min(m));
        let mut x: Vec<usize> = (0..m).collect();
        x.shuffle(&mut rng);
        x.truncate(kx);
        // best Y for this X: the right vertices with most neighbours in X
        let mut score: Vec<(usize, usize)> = (0..b.right_size())
            .map(|c| (x.iter().filter(|&&a| b.has_edge(a, c)).count(), c))
            .collect();
        score.sort_by_key(|a| std::cmp::Reverse(a.0));
        let ky = rng.gen_range(1..=k.min(b.right_size()));
        let e: usize = score[..ky].iter().map(|s| s.0).sum();
        if e as f64 > kx.min(ky) as f64 * bound {
            return false;
        }
    }
    true
}
