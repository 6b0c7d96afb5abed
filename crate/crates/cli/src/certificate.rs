//! Certificate files and their verifier.
//!
//! The verifier only uses the arc list stored in the certificate and its own
//! checks, never the pipeline audits that produced it.

use std::collections::HashSet;

use hamcycles::Digraph;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    /// `pack`, `cover`, `pack-pseudo` or `count`.
    pub task: String,
    pub n: usize,
    pub seed: u64,
    pub arcs: Vec<(usize, usize)>,
    pub cycles: Vec<Vec<usize>>,
    /// Counting only: the certified number of Hamilton cycles, in decimal.
    #[serde(default)]
    pub certified: Option<String>,
}

impl Certificate {
    pub fn new(task: &str, d: &Digraph, seed: u64, cycles: Vec<Vec<usize>>) -> Self {
        Certificate { task: task.to_string(), n: d.n(), seed, arcs: d.arcs().collect(), cycles, certified: None }
    }
}

/// What `verify` concluded. `Err` carries the message for exit code 3.
pub fn verify(c: &Certificate) -> Result<String, String> {
    let n = c.n;
    let arcs: HashSet<(usize, usize)> = c.arcs.iter().copied().collect();
    if let Some(&(a, b)) = c.arcs.iter().find(|&&(a, b)| a >= n || b >= n || a == b) {
        return Err(format!("arc ({a}, {b}) is not an arc on {n} vertices"));
    }
    let mut used: HashSet<(usize, usize)> = HashSet::new();
    for (i, cyc) in c.cycles.iter().enumerate() {
        if cyc.len() != n {
            return Err(format!("cycle {i}: length {} instead of {n}", cyc.len()));
        }
        let mut seen = vec![false; n];
        for &v in cyc {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(format!("cycle {i}: vertex {v} repeated or out of range"));
            }
        }
        for k in 0..n {
            let arc = (cyc[k], cyc[(k + 1) % n]);
            if !arcs.contains(&arc) {
                return Err(format!("cycle {i}: arc ({}, {}) is not in the digraph", arc.0, arc.1));
            }
            if !used.insert(arc) && c.task != "cover" {
                return Err(format!("cycle {i}: arc ({}, {}) already used by an earlier cycle", arc.0, arc.1));
            }
        }
    }
    match c.task.as_str() {
        "pack" | "pack-pseudo" => Ok(format!("{} arc-disjoint Hamilton cycles", c.cycles.len())),
        "cover" => {
            let missing = arcs.iter().filter(|a| !used.contains(a)).count();
            if missing > 0 {
                return Err(format!("{missing} arcs not covered by any cycle"));
            }
            Ok(format!("{} Hamilton cycles covering all {} arcs", c.cycles.len(), arcs.len()))
        }
        "count" => {
            let certified: u128 = c
                .certified
                .as_deref()
                .ok_or("count certificate without a certified value")?
                .parse()
                .map_err(|_| "certified value is not an integer".to_string())?;
            if n > 22 {
                return Ok(format!("certified {certified}; no independent recount above n = 22"));
            }
            let exact = count_cycles(n, &arcs);
            if certified > exact {
                return Err(format!("certified {certified} exceeds the {exact} Hamilton cycles of the digraph"));
            }
            Ok(format!("certified {certified} <= {exact} Hamilton cycles"))
        }
        other => Err(format!("unknown task {other}")),
    }
}

/// Hamilton cycles by a path DP from vertex 0, written separately from the library's.
fn count_cycles(n: usize, arcs: &HashSet<(usize, usize)>) -> u128 {
    if n < 2 {
        return 0;
    }
    let full = 1usize << n;
    let mut ways = vec![0u128; full * n];
    // mask {0}, ending at 0
    ways[n] = 1;
    for mask in (1..full).step_by(2) {
        for end in 0..n {
            let w = ways[mask * n + end];
            if w == 0 {
                continue;
            }
            for next in 1..n {
                if mask >> next & 1 == 0 && arcs.contains(&(end, next)) {
                    ways[(mask | 1 << next) * n + next] += w;
                }
            }
        }
    }
    (1..n).filter(|&e| arcs.contains(&(e, 0))).map(|e| ways[(full - 1) * n + e]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> Digraph {
        Digraph::complete(n)
    }

    #[test]
    fn recount_of_complete_digraphs() {
        for n in 2..8 {
            let arcs: HashSet<_> = complete(n).arcs().collect();
            assert_eq!(count_cycles(n, &arcs), (1..n as u128).product::<u128>());
        }
    }

    #[test]
    fn reused_arc_is_reported_with_its_cycle() {
        let d = complete(4);
        let c = Certificate::new("pack", &d, 0, vec![vec![0, 1, 2, 3], vec![3, 2, 1, 0], vec![0, 1, 3, 2]]);
        let e = verify(&c).unwrap_err();
        assert!(e.starts_with("cycle 2"), "{e}");
        let mut cover = c.clone();
        cover.task = "cover".into();
        assert!(verify(&cover).unwrap_err().contains("not covered"));
    }
}
