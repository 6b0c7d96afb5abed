//! Run configuration: flags override a `key = value` file, which overrides
//! the policy defaults.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use clap::Args;
use hamcycles::pipelines::PolicyOptions;
use serde::Serialize;

use crate::Failure;

/// Flags shared by the pipeline subcommands.
#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// Digraph file (text or binary); replaces --n and sampling
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Edge probability; with --input defaults to the measured density
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "alpha-override")]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub ell: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub t: Option<usize>,
    /// Residual rounds after the first phase
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub max_retries: Option<u32>,
    /// Partitions sampled by the counting certificate
    #[arg(long)]
    pub partitions: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Run below the density floor instead of refusing
    #[arg(long)]
    pub ignore_floor: bool,
    /// key = value file; flags win over it
    #[arg(long)]
    pub config: Option<String>,
    #[arg(long)]
    pub json_out: Option<String>,
    #[arg(long)]
    pub certificate: Option<String>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub jobs: Option<usize>,
}

const KEYS: &[&str] = &[
    "input", "n", "p", "seed", "alpha", "ell", "s", "t", "rounds", "max_retries", "partitions", "lambda",
    "ignore_floor", "jobs",
];

pub fn read_file(path: &Path) -> Result<BTreeMap<String, String>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::other(format!("{}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<BTreeMap<String, String>, Failure> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Failure::other(format!("config line {}: expected key = value", i + 1)));
        };
        let k = k.trim().replace('-', "_");
        if !KEYS.contains(&k.as_str()) {
            return Err(Failure::other(format!("config line {}: unknown key {k}", i + 1)));
        }
        map.insert(k, v.trim().to_string());
    }
    Ok(map)
}

/// The configuration a run actually used, echoed into every JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct Effective {
    pub input: Option<String>,
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub seed: u64,
    pub alpha: Option<f64>,
    pub ell: Option<usize>,
    pub s: Option<usize>,
    pub t: Option<usize>,
    pub rounds: Option<usize>,
    pub max_retries: Option<u32>,
    pub partitions: Option<usize>,
    pub lambda: f64,
    pub ignore_floor: bool,
    pub jobs: Option<usize>,
}

fn pick<T: FromStr>(flag: Option<T>, file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, Failure> {
    if flag.is_some() {
        return Ok(flag);
    }
    match file.get(key) {
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| Failure::other(format!("config: cannot parse {key} = {v}"))),
        None => Ok(None),
    }
}

impl Effective {
    pub fn resolve(args: &RunArgs) -> Result<Self, Failure> {
        let file = match &args.config {
            Some(path) => read_file(Path::new(path))?,
            None => BTreeMap::new(),
        };
        Ok(Effective {
            input: pick(args.input.clone(), &file, "input")?,
            n: pick(args.n, &file, "n")?,
            p: pick(args.p, &file, "p")?,
            seed: pick(args.seed, &file, "seed")?.unwrap_or(0),
            alpha: pick(args.alpha, &file, "alpha")?,
            ell: pick(args.ell, &file, "ell")?,
            s: pick(args.s, &file, "s")?,
            t: pick(args.t, &file, "t")?,
            rounds: pick(args.rounds, &file, "rounds")?,
            max_retries: pick(args.max_retries, &file, "max_retries")?,
            partitions: pick(args.partitions, &file, "partitions")?,
            lambda: pick(args.lambda, &file, "lambda")?.unwrap_or(0.05),
            ignore_floor: args.ignore_floor || pick(None, &file, "ignore_floor")?.unwrap_or(false),
            jobs: pick(args.jobs, &file, "jobs")?,
        })
    }

    pub fn policy(&self) -> PolicyOptions {
        PolicyOptions {
            alpha: self.alpha,
            ell: self.ell,
            s: self.s,
            t: self.t,
            lambda: Some(self.lambda),
            residual_rounds: self.rounds,
            max_retries: self.max_retries,
            partitions_sample: self.partitions,
            ignore_floor: self.ignore_floor,
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let dir = std::env::temp_dir().join(format!("hamcycles-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        std::fs::write(&path, "# pilot\nn = 50\nseed = 7\nalpha = 3\n").unwrap();
        let args = RunArgs { seed: Some(9), config: Some(path.display().to_string()), ..Default::default() };
        let e = Effective::resolve(&args).unwrap();
        assert_eq!(e.seed, 9);
        assert_eq!(e.n, Some(50));
        assert_eq!(e.alpha, Some(3.0));
        assert_eq!(e.lambda, 0.05);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse("colour = red").is_err());
        assert!(parse("n 5").is_err());
        assert_eq!(parse("max-retries = 4").unwrap()["max_retries"], "4");
    }
}
