//! Parameter policy: turns `(n, p, task)` into concrete partition sizes.
//!
//! The asymptotic choices (`ℓ = α³ log n`, `t = α⁵ log³ n`, …) describe
//! partitions that do not exist at a few hundred vertices, so every task has
//! a desk policy that keeps the shape of the construction (many random
//! `(ℓ,s)`-partitions, per-layer matchings, contraction through `V₀`) with
//! sizes that fit. The literal values and the hypothesis inequalities are
//! still computed and reported with their slack.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Pack,
    Cover,
    Count,
    PackPseudo,
}

impl std::str::FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pack" => Ok(Task::Pack),
            "cover" => Ok(Task::Cover),
            "count" => Ok(Task::Count),
            "pack-pseudo" | "pack_pseudo" => Ok(Task::PackPseudo),
            _ => Err(Error::InvalidParameter(format!("unknown task `{s}`"))),
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Task::Pack => "pack",
            Task::Cover => "cover",
            Task::Count => "count",
            Task::PackPseudo => "pack-pseudo",
        })
    }
}

/// One hypothesis inequality `lhs ≥ rhs` evaluated at the chosen parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slack {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Slack {
    fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        Slack {
            name: name.to_string(),
            lhs,
            rhs,
            holds: lhs >= rhs,
        }
    }

    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

/// The asymptotic parameter formulas evaluated at this `n` (not rounded).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LiteralParams {
    pub ell: f64,
    pub s: f64,
    pub m: f64,
    pub t: f64,
}

/// Caller-side adjustments; anything left `None` comes from the policy.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PolicyOptions {
    pub alpha: Option<f64>,
    pub ell: Option<usize>,
    pub s: Option<usize>,
    pub t: Option<usize>,
    pub lambda: Option<f64>,
    pub residual_rounds: Option<usize>,
    pub max_retries: Option<u32>,
    pub enforce_balance: Option<bool>,
    pub partitions_sample: Option<usize>,
    /// Skip the density floor (the pipeline still runs the same code).
    pub ignore_floor: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams {
    pub task: Task,
    pub n: usize,
    pub p: f64,
    pub alpha: f64,
    pub ell: usize,
    pub s: usize,
    pub m: usize,
    /// Number of random partitions in the first phase.
    pub t: usize,
    /// Expected per-subdigraph probability of an interior arc.
    pub p_in: f64,
    /// Expected per-subdigraph probability of an exterior arc.
    pub p_ex: f64,
    pub lambda: f64,
    /// `p / log⁶ n`.
    pub p_prime: f64,
    /// Expected number of matchings per layer in a subdigraph, `⌊m·p_in⌋`.
    pub l_target: usize,
    /// Cap on matchings per layer (pseudo-random packing only).
    pub l_cap: Option<usize>,
    pub max_retries: u32,
    /// Extra rounds run on the arcs left over by the first phase.
    pub residual_rounds: usize,
    /// Partitions per extra round.
    pub residual_t: usize,
    /// Reject partition families whose `|A_e|`, `|B_e|` stray beyond 50% of
    /// their expectation (diagnostic only when false).
    pub enforce_balance: bool,
    pub max_resamples: u32,
    /// Partitions sampled by the counting certificate.
    pub partitions_sample: usize,
    /// Path systems per partition enumerated exactly before switching to sampling.
    pub enum_cap: usize,
    pub literal: LiteralParams,
    pub slack: Vec<Slack>,
}

impl ExperimentParams {
    /// Expected `|A_e|` over `t` uniform partitions.
    pub fn expected_interior_multiplicity(&self, t: usize) -> f64 {
        let (n, m) = (self.n as f64, self.m as f64);
        (self.ell as f64 - 1.0) * m * m * t as f64 / (n * (n - 1.0))
    }

    /// Expected `|B_e|` over `t` uniform partitions.
    pub fn expected_exterior_multiplicity(&self, t: usize) -> f64 {
        let (n, m, s) = (self.n as f64, self.m as f64, self.s as f64);
        (m * m + 2.0 * s * m + s * (s - 1.0)) * t as f64 / (n * (n - 1.0))
    }
}

/// Density floors: a task is refused when `np < c · (ln n)^k`.
pub mod floors {
    pub const PACK: (f64, i32) = (0.1, 4);
    pub const COVER: (f64, i32) = (1.0, 2);
    pub const COUNT: (f64, i32) = (0.5, 2);
    pub const PACK_PSEUDO: (f64, i32) = (0.1, 4);
    /// Smallest `n` for the packing and covering tasks.
    pub const MIN_N: usize = 50;
}

/// Desk constants for the pipeline policies.
pub mod desk {
    /// `ℓ` for packing.
    pub const PACK_ELL: usize = 5;
    /// `s ≈ n / PACK_S_DIV` for packing.
    pub const PACK_S_DIV: f64 = 12.0;
    /// `t ≈ PACK_T_PER_ELL · ℓ` partitions in the first packing phase.
    pub const PACK_T_PER_ELL: usize = 2;
    pub const PACK_RESIDUAL_ROUNDS: usize = 12;
    pub const COVER_ELL: usize = 4;
    pub const COVER_S_DIV: f64 = 10.0;
    pub const COVER_T_PER_ELL: usize = 2;
    pub const COVER_RESIDUAL_ROUNDS: usize = 200;
    /// Counting falls back to a two-block shape when the literal `m` is below this.
    pub const COUNT_MIN_M: f64 = 8.0;
    pub const COUNT_SMALL_ELL: usize = 2;
    pub const COUNT_SMALL_S: usize = 2;
}

fn ln(x: f64) -> f64 {
    x.ln()
}

/// Moves `s` by at most `ell − 1` so that `ell` divides `n − s`, keeping `1 ≤ s < n`.
fn fit_s(n: usize, ell: usize, s: usize) -> Option<usize> {
    let mut best: Option<usize> = None;
    let lo = s.saturating_sub(ell - 1).max(1);
    let hi = (s + ell - 1).min(n - 1);
    for c in lo..=hi {
        if (n - c).is_multiple_of(ell) && (n - c) / ell >= 1 {
            let better = match best {
                None => true,
                Some(b) => c.abs_diff(s) < b.abs_diff(s),
            };
            if better {
                best = Some(c);
            }
        }
    }
    best
}

fn check_floor(task: Task, n: usize, p: f64, opts: &PolicyOptions) -> Result<()> {
    let (c, k) = match task {
        Task::Pack => floors::PACK,
        Task::Cover => floors::COVER,
        Task::Count => floors::COUNT,
        Task::PackPseudo => floors::PACK_PSEUDO,
    };
    let need = c * ln(n as f64).powi(k);
    if !opts.ignore_floor && (n as f64) * p < need {
        return Err(Error::Refused(format!(
            "{task}: np = {:.3} is below the density floor {c}·ln^{k} n = {need:.3}",
            n as f64 * p
        )));
    }
    Ok(())
}

/// Chooses concrete parameters for `task` on `D(n, p)`.
pub fn parameter_policy(n: usize, p: f64, task: Task, opts: &PolicyOptions) -> Result<ExperimentParams> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} must lie in (0, 1]")));
    }
    let min_n = if task == Task::Count { 5 } else { floors::MIN_N };
    if n < min_n {
        return Err(Error::Refused(format!("{task}: n = {n} is below the minimum {min_n}")));
    }
    check_floor(task, n, p, opts)?;
    let nf = n as f64;
    let lnn = ln(nf);
    let alpha = opts.alpha.unwrap_or(2.0);
    if alpha <= 1.0 {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must exceed 1")));
    }
    let lambda = opts.lambda.unwrap_or(0.05);
    let p_prime = p / lnn.powi(6);

    let (literal, mut ell, s_raw, t) = match task {
        Task::Pack => {
            let lit = LiteralParams {
                ell: alpha.powi(3) * lnn,
                s: nf / (alpha * alpha * lnn),
                m: nf / (alpha.powi(3) * lnn),
                t: alpha.powi(5) * lnn.powi(3),
            };
            let ell = opts.ell.unwrap_or(desk::PACK_ELL);
            let s = opts.s.unwrap_or((nf / desk::PACK_S_DIV).round() as usize);
            let t = opts.t.unwrap_or(desk::PACK_T_PER_ELL * ell);
            (lit, ell, s, t)
        }
        Task::Cover => {
            let lit = LiteralParams {
                ell: alpha,
                s: nf / alpha,
                m: nf / alpha,
                t: alpha * alpha * lnn,
            };
            let ell = opts.ell.unwrap_or(desk::COVER_ELL);
            let s = opts.s.unwrap_or((nf / desk::COVER_S_DIV).round() as usize);
            let t = opts.t.unwrap_or(desk::COVER_T_PER_ELL * ell);
            (lit, ell, s, t)
        }
        Task::Count => {
            let lit = LiteralParams {
                ell: 2.0 * alpha * lnn,
                s: nf / (alpha * lnn),
                m: (nf - nf / (alpha * lnn)) / (2.0 * alpha * lnn),
                t: 1.0,
            };
            let small = lit.m < desk::COUNT_MIN_M;
            let s = opts
                .s
                .unwrap_or(if small { desk::COUNT_SMALL_S } else { (lit.s.round() as usize).max(1) });
            let ell = opts
                .ell
                .unwrap_or(if small { desk::COUNT_SMALL_ELL } else { lit.ell.round() as usize });
            (lit, ell, s, 1)
        }
        Task::PackPseudo => {
            let s_lit = (nf / (alpha * p_prime)).sqrt();
            let m_lit = s_lit / lnn;
            let ell_lit = (nf - s_lit) / m_lit;
            let lit = LiteralParams {
                ell: ell_lit,
                s: s_lit,
                m: m_lit,
                t: alpha * ell_lit * ell_lit * lnn,
            };
            // the literal s exceeds n at any desk size, so the packing shape is used
            let ell = opts.ell.unwrap_or(desk::PACK_ELL);
            let s = opts.s.unwrap_or((nf / desk::PACK_S_DIV).round() as usize);
            let t = opts.t.unwrap_or(desk::PACK_T_PER_ELL * ell);
            (lit, ell, s, t)
        }
    };

    // keep m ≥ 2 and ℓ ≥ 2
    let s_clamped = s_raw.clamp(1, n.saturating_sub(4).max(1));
    ell = ell.clamp(2, ((n - s_clamped) / 2).max(2));
    let s = fit_s(n, ell, s_clamped).ok_or_else(|| {
        Error::InvalidParameter(format!("no s near {s_clamped} makes n - s divisible by ell = {ell}"))
    })?;
    let m = (n - s) / ell;
    if m < 1 || t < 1 {
        return Err(Error::InvalidParameter("partition sizes collapsed".into()));
    }

    let mut params = ExperimentParams {
        task,
        n,
        p,
        alpha,
        ell,
        s,
        m,
        t,
        p_in: 0.0,
        p_ex: 0.0,
        lambda,
        p_prime,
        l_target: 0,
        l_cap: None,
        max_retries: opts.max_retries.unwrap_or(3),
        residual_rounds: 0,
        residual_t: 0,
        enforce_balance: opts.enforce_balance.unwrap_or(false),
        max_resamples: 5,
        partitions_sample: opts.partitions_sample.unwrap_or(64),
        enum_cap: 4096,
        literal,
        slack: Vec::new(),
    };
    let a_mult = params.expected_interior_multiplicity(t).max(1.0);
    let b_mult = params.expected_exterior_multiplicity(t).max(1.0);
    let (mf, sf, lf, tf) = (m as f64, s as f64, ell as f64, t as f64);
    match task {
        Task::Pack | Task::PackPseudo => {
            params.p_in = (p * (1.0 - 1.0 / alpha) / a_mult).min(1.0);
            params.p_ex = (p / (alpha * b_mult)).min(1.0);
            params.residual_rounds = opts.residual_rounds.unwrap_or(desk::PACK_RESIDUAL_ROUNDS);
            params.residual_t = t;
        }
        Task::Cover => {
            params.p_in = (p / a_mult).min(1.0);
            params.p_ex = p;
            params.residual_rounds = opts.residual_rounds.unwrap_or(desk::COVER_RESIDUAL_ROUNDS);
            params.residual_t = 1;
        }
        Task::Count => {
            params.p_in = p;
            params.p_ex = p;
        }
    }
    params.l_target = (mf * params.p_in).floor() as usize;
    if task == Task::PackPseudo {
        let cap = ((1.0 - 4.0 * lambda) * mf * p * params.p_in).floor() as usize;
        params.l_cap = Some(cap.max(1));
    }

    let mut sl = Vec::new();
    match task {
        Task::Pack => {
            sl.push(Slack::new("p ≥ α⁶ln⁴n/n", p, alpha.powi(6) * lnn.powi(4) / nf));
            sl.push(Slack::new("m·p_in ≥ ln n", mf * params.p_in, lnn));
            sl.push(Slack::new(
                "p_ex ≥ m·p_in·ln n/(m+s)",
                params.p_ex,
                mf * params.p_in * lnn / (mf + sf),
            ));
            sl.push(Slack::new("t ≥ ℓ ln n", tf, lf * lnn));
            sl.push(Slack::new("t ≥ (n/s)² ln n", tf, (nf / sf).powi(2) * lnn));
            sl.push(Slack::new("s ≥ m", sf, mf));
        }
        Task::Cover => {
            sl.push(Slack::new("p ≥ α⁴ln²n/n", p, alpha.powi(4) * lnn * lnn / nf));
            sl.push(Slack::new("m·p_in ≥ ln n", mf * params.p_in, lnn));
            sl.push(Slack::new("(m+s)·p_ex ≥ ln n", (mf + sf) * params.p_ex, lnn));
            sl.push(Slack::new("t ≥ ℓ ln n", tf, lf * lnn));
        }
        Task::Count => {
            sl.push(Slack::new("p ≥ α²ln²n/n", p, alpha * alpha * lnn * lnn / nf));
            sl.push(Slack::new("m·p ≥ ln n", mf * p, lnn));
            sl.push(Slack::new("(s+m)·p ≥ α ln n", (sf + mf) * p, alpha * lnn));
        }
        Task::PackPseudo => {
            sl.push(Slack::new("p ≥ ln¹⁴n/n", p, lnn.powi(14) / nf));
            sl.push(Slack::new("1/100 ≥ λ", 0.01, lambda));
            sl.push(Slack::new("n ≥ literal s", nf, params.literal.s));
            sl.push(Slack::new("m·p_in ≥ ln n", mf * params.p_in, lnn));
        }
    }
    params.slack = sl;
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_postcondition() {
        for task in [Task::Pack, Task::Cover, Task::Count, Task::PackPseudo] {
            for n in [50, 97, 400, 600, 1000] {
                let p = parameter_policy(n, 0.5, task, &PolicyOptions::default()).unwrap();
                assert_eq!(p.m * p.ell + p.s, n, "{task} n={n}");
                assert!(p.m >= 2 && p.ell >= 2 && p.s >= 1);
            }
        }
    }

    #[test]
    fn small_count_shapes() {
        let p = parameter_policy(16, 0.5, Task::Count, &PolicyOptions::default()).unwrap();
        assert_eq!((p.ell, p.s, p.m), (2, 2, 7));
        let p = parameter_policy(17, 0.5, Task::Count, &PolicyOptions::default()).unwrap();
        assert_eq!((p.ell, p.s, p.m), (2, 1, 8));
    }

    #[test]
    fn refusals() {
        let e = parameter_policy(100, 0.001, Task::Pack, &PolicyOptions::default());
        assert!(matches!(e, Err(Error::Refused(_))));
        let e = parameter_policy(30, 0.5, Task::Pack, &PolicyOptions::default());
        assert!(matches!(e, Err(Error::Refused(_))));
        assert!(parameter_policy(100, 1.5, Task::Pack, &PolicyOptions::default()).is_err());
    }

    #[test]
    fn fit_s_moves_little() {
        assert_eq!(fit_s(12, 5, 1), Some(2));
        assert_eq!(fit_s(16, 6, 3), Some(4));
    }
}
