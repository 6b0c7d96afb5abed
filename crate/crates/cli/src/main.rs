//! `hamcycles`: batch runner and certificate verifier.
//!
//! Exit codes: 0 success, 1 error, 2 refused by the density floor, 3 audit
//! or verification failure.

mod certificate;
mod config;
mod sweep;

use std::fs::File;
use std::io::{BufReader, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hamcycles::graph::{io, sample_bipartite, sample_dnp};
use hamcycles::hamilton::count_hamilton_exact;
use hamcycles::matching::count_pms;
use hamcycles::pipelines::{count_certify, cover_report, pack, parameter_policy, Task};
use hamcycles::pseudorandom::{check_pseudorandom, check_hamiltonicity_conditions, density, pack_pseudorandom_with, CheckBudget};
use hamcycles::{BipartiteGraph, Digraph, Error};
use serde::Serialize;

use certificate::Certificate;
use config::{Effective, RunArgs};

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    pub fn other(msg: impl Into<String>) -> Self {
        Failure { code: 1, msg: msg.into() }
    }

    fn audit(msg: impl Into<String>) -> Self {
        Failure { code: 3, msg: msg.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Refused(_) => 2,
            Error::CoverageFailure { .. } => 3,
            _ => 1,
        };
        Failure { code, msg: e.to_string() }
    }
}

#[derive(Parser)]
#[command(name = "hamcycles", version, about = "Pack, cover and count Hamilton cycles in random digraphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Dnp,
    Bipartite,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Binary,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a random digraph or bipartite graph
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value = "dnp")]
        model: Model,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Pack arc-disjoint Hamilton cycles
    Pack(RunArgs),
    /// Cover every arc by Hamilton cycles
    Cover(RunArgs),
    /// Certify a lower bound on the number of Hamilton cycles
    Count(RunArgs),
    /// Pack in a pseudo-random digraph at its measured density
    PackPseudo(RunArgs),
    /// Re-check a certificate file
    Verify { certificate: String },
    /// Check the pseudo-random properties
    CheckPseudo {
        #[command(flatten)]
        run: RunArgs,
        /// Sampled trials per set-pair condition
        #[arg(long)]
        budget: Option<usize>,
        /// Also check the sufficient conditions for Hamiltonicity
        #[arg(long)]
        hamiltonicity: bool,
    },
    /// Run a grid of experiments and write CSV
    Sweep {
        #[arg(long)]
        task: String,
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        /// Seeds 0..k per (n, p)
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        #[arg(long, default_value_t = 0.05)]
        lambda: f64,
        #[arg(long)]
        out: Option<String>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Exact counts for small instances
    Oracle {
        /// Count Hamilton cycles of a digraph
        #[arg(long, conflicts_with = "permanent")]
        count_ham: bool,
        /// Count perfect matchings of a bipartite graph
        #[arg(long)]
        permanent: bool,
        #[arg(long)]
        input: Option<String>,
        /// Use the complete graph on this many vertices (per side)
        #[arg(long)]
        complete: Option<usize>,
    },
}

/// Writes through a temporary file so readers never see a partial result.
fn write_atomic(path: &str, bytes: &[u8]) -> Result<(), Failure> {
    let tmp = format!("{path}.tmp");
    std::fs::write(&tmp, bytes)
        .and_then(|_| std::fs::rename(&tmp, path))
        .map_err(|e| Failure::other(format!("{path}: {e}")))
}

fn write_json<T: Serialize>(path: &str, value: &T) -> Result<(), Failure> {
    let bytes = serde_json::to_vec_pretty(value).map_err(|e| Failure::other(e.to_string()))?;
    write_atomic(path, &bytes)
}

fn read_digraph(path: &str) -> Result<Digraph, Failure> {
    let f = File::open(path).map_err(|e| Failure::other(format!("{path}: {e}")))?;
    Ok(io::read_any(BufReader::new(f))?)
}

fn set_jobs(jobs: Option<usize>) {
    if let Some(k) = jobs {
        // only fails if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
    }
}

/// The host digraph and the density the policy should use.
fn host(cfg: &Effective) -> Result<(Digraph, f64), Failure> {
    match &cfg.input {
        Some(path) => {
            let d = read_digraph(path)?;
            let p = cfg.p.unwrap_or_else(|| density(&d));
            Ok((d, p))
        }
        None => {
            let n = cfg.n.ok_or_else(|| Failure::other("give --input or --n"))?;
            let p = cfg.p.ok_or_else(|| Failure::other("--p is required with --n"))?;
            Ok((sample_dnp(n, p, cfg.seed)?, p))
        }
    }
}

#[derive(Serialize)]
struct Output<'a, R: Serialize> {
    config: &'a Effective,
    report: &'a R,
}

fn finish<R: Serialize>(args: &RunArgs, cfg: &Effective, report: &R, cert: Option<Certificate>) -> Result<(), Failure> {
    if let Some(path) = &args.json_out {
        write_json(path, &Output { config: cfg, report })?;
    }
    if let (Some(path), Some(c)) = (&args.certificate, cert) {
        write_json(path, &c)?;
    }
    Ok(())
}

fn cycles_of(cs: &[hamcycles::HamCycle]) -> Vec<Vec<usize>> {
    cs.iter().map(|c| c.order.clone()).collect()
}

fn run_pipeline(task: Task, args: &RunArgs) -> Result<(), Failure> {
    let cfg = Effective::resolve(args)?;
    set_jobs(cfg.jobs);
    let (d, p) = host(&cfg)?;
    let n = d.n();
    let opts = cfg.policy();
    let np = n as f64 * p;
    match task {
        Task::Pack | Task::PackPseudo => {
            let (name, r) = if task == Task::Pack {
                let params = parameter_policy(n, p, task, &opts)?;
                ("pack", pack(&d, &params, cfg.seed)?)
            } else {
                ("pack-pseudo", pack_pseudorandom_with(&d, cfg.lambda, &opts, cfg.seed)?)
            };
            println!(
                "{name} n={n} p={p:.4} seed={}: {} cycles, achieved/np {:.4}, audit {}, {} ms",
                cfg.seed,
                r.achieved,
                r.ratio_np,
                if r.audit.passed() { "clean" } else { "FAILED" },
                r.wall_ms
            );
            finish(args, &cfg, &r, Some(Certificate::new(name, &d, cfg.seed, cycles_of(&r.cycles))))?;
            if !r.audit.passed() {
                return Err(Failure::audit(format!("audit failed: {:?}", r.audit)));
            }
        }
        Task::Cover => {
            let params = parameter_policy(n, p, task, &opts)?;
            let r = cover_report(&d, &params, cfg.seed)?;
            println!(
                "cover n={n} p={p:.4} seed={}: {} cycles ({:.3} np), {} arcs uncovered, {} ms",
                cfg.seed,
                r.cycles.len(),
                r.cycles.len() as f64 / np,
                r.audit.uncovered.len(),
                r.wall_ms
            );
            finish(args, &cfg, &r, Some(Certificate::new("cover", &d, cfg.seed, cycles_of(&r.cycles))))?;
            if !r.audit.passed() {
                return Err(Failure::audit(format!("{} arcs uncovered", r.audit.uncovered.len())));
            }
        }
        Task::Count => {
            let params = parameter_policy(n, p, task, &opts)?;
            let c = count_certify(&d, &params, cfg.seed, params.partitions_sample)?;
            let certified: u128 = c.partitions.iter().map(|pc| pc.cycles).sum();
            let show = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3}"));
            println!(
                "count n={n} p={p:.4} seed={}: ln certified {}, ln extrapolated {}, ln n!p^n {:.3}, ln exact {}, {} ms",
                cfg.seed,
                show(c.ln_certified),
                show(c.ln_extrapolated),
                c.ln_reference,
                show(c.ln_exact),
                c.wall_ms
            );
            let mut cert = Certificate::new("count", &d, cfg.seed, Vec::new());
            cert.certified = Some(certified.to_string());
            finish(args, &cfg, &c, Some(cert))?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Generate { n, p, model, seed, out, format } => {
            let mut buf = Vec::new();
            match model {
                Model::Dnp => {
                    let d = sample_dnp(n, p, seed)?;
                    match format {
                        Format::Text => io::write_text(&d, &mut buf)?,
                        Format::Binary => io::write_binary(&d, &mut buf)?,
                    }
                }
                Model::Bipartite => io::write_bipartite_text(&sample_bipartite(n, n, p, seed)?, &mut buf)?,
            }
            match out {
                Some(path) => write_atomic(&path, &buf)?,
                None => std::io::stdout().write_all(&buf).map_err(|e| Failure::other(e.to_string()))?,
            }
        }
        Cmd::Pack(a) => run_pipeline(Task::Pack, &a)?,
        Cmd::Cover(a) => run_pipeline(Task::Cover, &a)?,
        Cmd::Count(a) => run_pipeline(Task::Count, &a)?,
        Cmd::PackPseudo(a) => run_pipeline(Task::PackPseudo, &a)?,
        Cmd::Verify { certificate } => {
            let text = std::fs::read_to_string(&certificate).map_err(|e| Failure::other(format!("{certificate}: {e}")))?;
            let c: Certificate = serde_json::from_str(&text).map_err(|e| Failure::other(format!("{certificate}: {e}")))?;
            match certificate::verify(&c) {
                Ok(msg) => println!("ok: {msg}"),
                Err(msg) => return Err(Failure::audit(msg)),
            }
        }
        Cmd::CheckPseudo { run, budget, hamiltonicity } => {
            let cfg = Effective::resolve(&run)?;
            set_jobs(cfg.jobs);
            let (d, p) = host(&cfg)?;
            let mut b = CheckBudget { seed: cfg.seed, ..Default::default() };
            if let Some(t) = budget {
                b.trials = t;
            }
            let rep = check_pseudorandom(&d, cfg.lambda, p, &b)?;
            println!(
                "pseudo-random n={} lambda={} p={p:.4}: P1 {}, P2 {}, P3 {}",
                d.n(),
                cfg.lambda,
                if rep.p1.ok { "pass" } else { "fail" },
                if rep.p2.passed() { "pass" } else { "fail" },
                if rep.p3.passed() { "pass" } else { "fail" }
            );
            if hamiltonicity {
                let t = check_hamiltonicity_conditions(&d, cfg.lambda, p, &b)?;
                println!("sufficient conditions for Hamiltonicity: {}", if t.predicts_hamiltonian { "met" } else { "not met" });
                finish(&run, &cfg, &(&rep, &t), None)?;
            } else {
                finish(&run, &cfg, &rep, None)?;
            }
        }
        Cmd::Sweep { task, n, p, seeds, base_seed, lambda, out, jobs } => {
            set_jobs(jobs);
            let sw = sweep::Sweep {
                task: task.parse()?,
                task_name: task,
                ns: n,
                ps: p,
                seeds,
                base_seed,
                lambda,
                opts: Default::default(),
            };
            let rows = sweep::run(&sw)?;
            match out {
                Some(path) => {
                    let mut buf = Vec::new();
                    sweep::write_csv(&rows, &mut buf)?;
                    write_atomic(&path, &buf)?;
                }
                None => sweep::write_csv(&rows, std::io::stdout().lock())?,
            }
        }
        Cmd::Oracle { count_ham, permanent, input, complete } => {
            if !count_ham && !permanent {
                return Err(Failure::other("choose --count-ham or --permanent"));
            }
            let value = if count_ham {
                let d = match (&input, complete) {
                    (Some(path), _) => read_digraph(path)?,
                    (None, Some(n)) => Digraph::complete(n),
                    (None, None) => return Err(Failure::other("give --input or --complete")),
                };
                count_hamilton_exact(&d)?
            } else {
                let b = match (&input, complete) {
                    (Some(path), _) => {
                        let f = File::open(path).map_err(|e| Failure::other(format!("{path}: {e}")))?;
                        io::read_bipartite_text(BufReader::new(f))?
                    }
                    (None, Some(n)) => BipartiteGraph::complete(n, n),
                    (None, None) => return Err(Failure::other("give --input or --complete")),
                };
                count_pms(&b)?
            };
            println!("{value}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hamcycles: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
