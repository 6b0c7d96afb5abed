//! Cartesian sweeps over `n`, `p` and seeds, one CSV row per run.
//!
//! Columns, in this order: `n, p, seed, task, achieved, reference, ratio,
//! wall_ms, retries, failures`. For pack and cover `achieved` is a cycle count
//! and `reference` is `np`. For counting both are natural logs, `achieved` the
//! certified count and `reference` `ln(n! pⁿ)`, and `ratio` is the per-vertex
//! factor `exp((achieved − reference)/n)`. Refused runs leave `achieved` and
//! `ratio` empty.

use std::time::Instant;

use hamcycles::graph::sample_dnp;
use hamcycles::pipelines::{count_certify, cover_report, pack, parameter_policy, PolicyOptions, Task};
use hamcycles::pseudorandom::pack_pseudorandom_with;
use hamcycles::{seed, Error};
use rayon::prelude::*;
use serde::Serialize;

use crate::Failure;

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub task: String,
    pub achieved: Option<f64>,
    pub reference: f64,
    pub ratio: Option<f64>,
    pub wall_ms: u128,
    pub retries: usize,
    pub failures: usize,
}

pub struct Sweep {
    pub task: Task,
    pub task_name: String,
    pub ns: Vec<usize>,
    pub ps: Vec<f64>,
    pub seeds: u64,
    pub base_seed: u64,
    pub lambda: f64,
    pub opts: PolicyOptions,
}

fn run_one(sw: &Sweep, n: usize, p: f64, s: u64) -> Result<Row, Failure> {
    let start = Instant::now();
    let sd = seed::derive(sw.base_seed, "sweep", s);
    let np = n as f64 * p;
    let mut row = Row {
        n,
        p,
        seed: s,
        task: sw.task_name.clone(),
        achieved: None,
        reference: np,
        ratio: None,
        wall_ms: 0,
        retries: 0,
        failures: 0,
    };
    let d = sample_dnp(n, p, sd).map_err(Failure::from)?;
    if sw.task == Task::Count {
        row.reference = hamcycles::matching::ln_factorial(n) + n as f64 * p.ln();
    }
    let params = match parameter_policy(n, p, sw.task, &sw.opts) {
        Ok(params) => params,
        Err(Error::Refused(_)) => {
            row.wall_ms = start.elapsed().as_millis();
            return Ok(row);
        }
        Err(e) => return Err(e.into()),
    };
    match sw.task {
        Task::Pack => {
            let r = pack(&d, &params, sd)?;
            row.achieved = Some(r.achieved as f64);
            row.retries = r.retries;
            row.failures = r.failures;
        }
        Task::PackPseudo => {
            let r = pack_pseudorandom_with(&d, sw.lambda, &sw.opts, sd)?;
            row.achieved = Some(r.achieved as f64);
            row.retries = r.retries;
            row.failures = r.failures;
        }
        Task::Cover => {
            let r = cover_report(&d, &params, sd)?;
            row.achieved = Some(r.cycles.len() as f64);
            row.retries = r.retries;
            row.failures = r.failures + r.audit.uncovered.len();
        }
        Task::Count => {
            let c = count_certify(&d, &params, sd, params.partitions_sample)?;
            row.achieved = c.ln_certified;
            row.failures = c.discarded.len();
        }
    }
    row.ratio = row.achieved.map(|a| match sw.task {
        Task::Count => ((a - row.reference) / n as f64).exp(),
        _ => a / np,
    });
    row.wall_ms = start.elapsed().as_millis();
    Ok(row)
}

pub fn run(sw: &Sweep) -> Result<Vec<Row>, Failure> {
    let mut grid = Vec::new();
    for &n in &sw.ns {
        for &p in &sw.ps {
            for s in 0..sw.seeds {
                grid.push((n, p, s));
            }
        }
    }
    // runs are independent; collect keeps the grid order
    grid.par_iter().map(|&(n, p, s)| run_one(sw, n, p, s)).collect()
}

pub fn write_csv<W: std::io::Write>(rows: &[Row], w: W) -> Result<(), Failure> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(|e| Failure::other(e.to_string()))?;
    }
    out.flush().map_err(|e| Failure::other(e.to_string()))
}
