//! Runs the standard suite once and prints one line per acceptance criterion.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use ym_helix_cli::{Report, SUITE_BUDGET_S};

const CRITERIA: [(u8, &str); 12] = [
    (1, "solver reaches the residual target in time"),
    (2, "symplectic flux is conserved across cuts"),
    (3, "gauge directions are null"),
    (4, "flux observables are Hamiltonian"),
    (5, "observables separate gauge classes"),
    (6, "bracket is a Poisson bracket"),
    (7, "Hodge-Morrey-Friedrichs dimensions"),
    (8, "boundary map kernel"),
    (9, "helicity current converges"),
    (10, "helicity converges"),
    (11, "gluing"),
    (12, "standard suite wall time"),
];

#[test]
fn acceptance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("verify.json");
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_ym-helix"))
        .args(["verify", "--timings", "--threads", "1", "--out", path.to_str().unwrap()])
        .output()
        .expect("binary runs");
    let wall = start.elapsed().as_secs_f64();
    let report: Report = serde_json::from_str(&std::fs::read_to_string(&path).expect("report written")).unwrap();
    let groups = report.by_criterion();

    let mut results = BTreeMap::new();
    for (c, title) in CRITERIA {
        let checks = groups.get(&c).cloned().unwrap_or_default();
        let (pass, summary) = if c == 12 {
            (wall < SUITE_BUDGET_S && !checks.is_empty() && checks.iter().all(|k| k.pass), format!("{wall:.1} s, limit {SUITE_BUDGET_S} s"))
        } else {
            let failed: Vec<_> = checks.iter().filter(|k| !k.pass).map(|k| k.name.as_str()).collect();
            let worst = checks
                .iter()
                .filter_map(|k| Some((k.value?, k.limit?, &k.name)))
                .filter(|(v, l, _)| *l > 0.0 && v <= l)
                .max_by(|a, b| (a.0 / a.1).total_cmp(&(b.0 / b.1)));
            let mut s = format!("{} checks", checks.len());
            if let Some((v, l, name)) = worst {
                s.push_str(&format!(", tightest {name} = {v:.3e} (limit {l:.1e})"));
            }
            if !failed.is_empty() {
                s.push_str(&format!(", failed: {}", failed.join("; ")));
            }
            (!checks.is_empty() && failed.is_empty(), s)
        };
        println!("criterion {c:>2} {}: {title}: {summary}", if pass { "PASS" } else { "FAIL" });
        results.insert(c, pass);
    }
    let loose: Vec<_> = report.checks.iter().filter(|k| k.criterion.is_none() && !k.pass).map(|k| &k.name).collect();
    assert!(loose.is_empty(), "failed checks outside any criterion: {loose:?}");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let failed: Vec<_> = results.iter().filter(|(_, p)| !**p).map(|(c, _)| *c).collect();
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}
