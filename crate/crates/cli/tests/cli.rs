use std::path::Path;
use std::process::{Command, Output};

fn hamcycles(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hamcycles")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn oracle_counts_complete_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let o = hamcycles(&["oracle", "--count-ham", "--complete", "5"], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "24");
    let o = hamcycles(&["oracle", "--permanent", "--complete", "5"], dir.path());
    assert_eq!(stdout(&o).trim(), "120");
}

#[test]
fn oracle_reads_generated_files() {
    let dir = tempfile::tempdir().unwrap();
    let g = hamcycles(&["generate", "--n", "7", "--p", "1.0", "--out", "k7.txt"], dir.path());
    assert!(g.status.success());
    let o = hamcycles(&["oracle", "--count-ham", "--input", "k7.txt"], dir.path());
    assert_eq!(stdout(&o).trim(), "720");
    let b = hamcycles(&["generate", "--n", "4", "--p", "1.0", "--model", "bipartite", "--out", "b.txt"], dir.path());
    assert!(b.status.success());
    let o = hamcycles(&["oracle", "--permanent", "--input", "b.txt"], dir.path());
    assert_eq!(stdout(&o).trim(), "24");
}

#[test]
fn pack_certificate_verifies_and_tampering_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let o = hamcycles(&["pack", "--n", "120", "--p", "0.5", "--seed", "2", "--certificate", "c.json"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(hamcycles(&["verify", "c.json"], dir.path()).status.success());

    // delete an arc used by cycle k: verification must fail and name cycle k
    let mut cert = json(&dir.path().join("c.json"));
    let cycles = cert["cycles"].as_array().unwrap().clone();
    assert!(!cycles.is_empty());
    let k = cycles.len() / 2;
    let (a, b) = (cycles[k][0].clone(), cycles[k][1].clone());
    let arcs = cert["arcs"].as_array_mut().unwrap();
    let before = arcs.len();
    arcs.retain(|arc| !(arc[0] == a && arc[1] == b));
    assert_eq!(arcs.len(), before - 1);
    std::fs::write(dir.path().join("t.json"), cert.to_string()).unwrap();
    let o = hamcycles(&["verify", "t.json"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains(&format!("cycle {k}")));
}

#[test]
fn cover_certificate_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = hamcycles(&["cover", "--n", "100", "--p", "0.4", "--seed", "5", "--certificate", "c.json"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = hamcycles(&["verify", "c.json"], dir.path());
    assert!(v.status.success());
    assert!(stdout(&v).contains("covering all"));
}

#[test]
fn count_certificate_is_checked_against_a_recount() {
    let dir = tempfile::tempdir().unwrap();
    let o = hamcycles(&["count", "--n", "14", "--p", "0.5", "--seed", "1", "--certificate", "k.json"], dir.path());
    assert!(o.status.success());
    assert!(hamcycles(&["verify", "k.json"], dir.path()).status.success());
    let mut cert = json(&dir.path().join("k.json"));
    cert["certified"] = serde_json::Value::String("100000000000".into());
    std::fs::write(dir.path().join("bad.json"), cert.to_string()).unwrap();
    assert_eq!(hamcycles(&["verify", "bad.json"], dir.path()).status.code(), Some(3));
}

#[test]
fn refusal_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = hamcycles(&["pack", "--n", "100", "--p", "0.001"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "n = 80\np = 0.5\nseed = 11\nrounds = 2\n").unwrap();
    let o = hamcycles(&["pack", "--config", "run.cfg", "--seed", "4", "--json-out", "r.json"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("r.json"));
    assert_eq!(r["config"]["seed"], 4);
    assert_eq!(r["config"]["n"], 80);
    assert_eq!(r["report"]["params"]["residual_rounds"], 2);
    assert_eq!(r["config"]["lambda"], 0.05);
}

#[test]
fn runs_are_reproducible_from_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    assert!(hamcycles(&["generate", "--n", "90", "--p", "0.5", "--seed", "6", "--out", "d.bin", "--format", "binary"], dir.path())
        .status
        .success());
    let a = hamcycles(&["pack", "--input", "d.bin", "--p", "0.5", "--seed", "6"], dir.path());
    let b = hamcycles(&["pack", "--n", "90", "--p", "0.5", "--seed", "6"], dir.path());
    let strip = |o: &Output| stdout(o).split(", ").take(3).collect::<Vec<_>>().join(", ");
    assert!(a.status.success() && b.status.success());
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn count_sweep_has_fixed_schema_and_ratio_band() {
    let dir = tempfile::tempdir().unwrap();
    let o = hamcycles(
        &["sweep", "--task", "count", "--n", "14,16,18", "--p", "0.4,0.5", "--seeds", "20", "--out", "s.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,p,seed,task,achieved,reference,ratio,wall_ms,retries,failures");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 120);
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r[6].parse().ok()).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    // pilot baseline 0.593
    assert!((0.45..=0.75).contains(&mean), "mean ratio {mean}");
    assert!(ratios.iter().all(|&r| r > 0.0 && r <= 1.0));
}

#[test]
fn check_pseudo_reports_all_three_properties() {
    let dir = tempfile::tempdir().unwrap();
    let o = hamcycles(&["check-pseudo", "--n", "60", "--p", "1.0", "--lambda", "0.1", "--json-out", "p.json"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("P1 pass"));
    let r = json(&dir.path().join("p.json"));
    assert_eq!(r["report"]["n"], 60);
}
