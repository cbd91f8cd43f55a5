//! The verification suite: per-mesh invariants, and the standard suite that
//! covers every acceptance criterion at desk scale.

use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;
use ym_helix::solver::SolverConfig;
use ym_helix::{Dec, Result};

use crate::blocks::*;
use crate::config::{GluePair, MeshSpec, StudyKind, Tolerances};
use crate::report::{Check, Failure};
use crate::study::refinement_study;

/// Seconds the standard suite may take.
pub const SUITE_BUDGET_S: f64 = 300.0;

type Job<'a> = (String, Box<dyn Fn() -> Result<Outcome> + Send + Sync + 'a>);

fn with_criterion(mut o: Outcome, c: u8) -> Outcome {
    for check in &mut o.checks {
        check.criterion.get_or_insert(c);
    }
    o
}

fn lab<'a>(dec: &'a Dec, spec: &MeshSpec, seed: u64, tol: &'a Tolerances, cfg: &'a SolverConfig) -> Lab<'a> {
    Lab { dec, name: spec.to_string(), seed, tol, cfg }
}

fn on_mesh<'a>(
    key: &str,
    name: &'a str,
    res: usize,
    seed: u64,
    tol: &'a Tolerances,
    cfg: &'a SolverConfig,
    f: impl Fn(&Lab) -> Result<Outcome> + Send + Sync + 'a,
) -> Job<'a> {
    let job = move || {
        let spec = MeshSpec::new(name, Some(res))?;
        let dec = spec.dec()?;
        f(&lab(&dec, &spec, seed, tol, cfg))
    };
    (format!("{key}/{name}@{res}"), Box::new(job))
}

/// Run jobs (in parallel when `threads > 1`) and merge them in list order.
fn run_jobs(jobs: Vec<Job>, threads: usize) -> (Outcome, Option<Failure>) {
    let exec = |(key, job): &Job| {
        let start = Instant::now();
        let r = job();
        (key.clone(), r, start.elapsed().as_secs_f64())
    };
    let results: Vec<(String, Result<Outcome>, f64)> = if threads > 1 {
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(|| jobs.par_iter().map(exec).collect()),
            Err(_) => jobs.iter().map(exec).collect(),
        }
    } else {
        jobs.iter().map(exec).collect()
    };
    let mut out = Outcome { data: json!({}), ..Default::default() };
    let mut failure = None;
    for (key, r, secs) in results {
        match r {
            Ok(o) => out.merge(&key, o),
            Err(e) => {
                out.checks.push(Check::flag(&format!("{key} completed"), false, e.to_string()));
                failure.get_or_insert_with(|| Failure::from(e));
            }
        }
        out.timings.insert(key, secs);
    }
    (out, failure)
}

/// Invariant suite on one mesh.
pub fn mesh_suite(spec: &MeshSpec, seed: u64, tol: &Tolerances, cfg: &SolverConfig, threads: usize) -> Result<(Outcome, Option<Failure>)> {
    let dec = spec.dec()?;
    let has_boundary = !dec.complex().boundary_indices(1).is_empty();
    let l = lab(&dec, spec, seed, tol, cfg);
    let l = &l;
    let mut jobs: Vec<Job> = Vec::new();
    if !has_boundary {
        jobs.push(("decompose".into(), Box::new(move || hmf_block(l, 20))));
        if dec.dim() == 3 {
            jobs.push(("helicity gauge".into(), Box::new(move || helicity_gauge_block(l))));
        }
        return Ok(run_jobs(jobs, threads));
    }
    jobs.push(("solver".into(), Box::new(move || solver_block(l, 3))));
    jobs.push(("conservation".into(), Box::new(move || conservation_block(l, 20, 4))));
    jobs.push(("gauge".into(), Box::new(move || gauge_block(l, 50))));
    jobs.push(("hamilton".into(), Box::new(move || hamilton_block(l, 5))));
    jobs.push(("poisson".into(), Box::new(move || poisson_block(l))));
    jobs.push(("decompose".into(), Box::new(move || hmf_block(l, 100))));
    jobs.push(("boundary-map".into(), Box::new(move || boundary_map_block(l))));
    if spec.name == "annulus" {
        jobs.push(("aharonov-bohm".into(), Box::new(move || aharonov_bohm_block(l))));
    } else {
        jobs.push(("separation".into(), Box::new(move || separation_suite_block(l))));
    }
    if spec.is_box() {
        jobs.push(("round-trip".into(), Box::new(move || round_trip_block(l))));
    }
    Ok(run_jobs(jobs, threads))
}

/// ∫α⌣dα is unchanged by α ↦ α + df.
fn helicity_gauge_block(lab: &Lab) -> Result<Outcome> {
    let dec = lab.dec;
    let a = dec.sample_one_form(|x| vec![x[2].cos(), x[2].sin(), 0.0]);
    let h0 = dec.integrate_top(&dec.cup(&a, &dec.d(&a)?)?)?;
    let mut rng = crate::config::stream(lab.seed, 1100);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let b = a.add(&dec.d(&random_cochain(dec, 0, &mut rng))?)?;
        let h = dec.integrate_top(&dec.cup(&b, &dec.d(&b)?)?)?;
        worst = worst.max((h - h0).abs() / h0.abs().max(1.0));
    }
    Ok(Outcome {
        checks: vec![Check::at_most("helicity gauge invariance", worst, 1e-10).on(&lab.name)],
        data: json!({ "helicity": h0, "max_relative_change": worst }),
        ..Default::default()
    })
}

fn expect_dims(key: &'static str, expected: usize, c: u8) -> impl Fn(Outcome) -> Outcome {
    move |mut o: Outcome| {
        let found = o.data[key].as_u64().unwrap_or(u64::MAX) as usize;
        let mesh = o.checks.first().and_then(|c| c.mesh.clone()).unwrap_or_default();
        o.checks.push(Check::equal(key, found, expected).criterion(c).on(mesh));
        o
    }
}

fn study_job(kind: StudyKind, seed: u64, tol: &Tolerances, cfg: &SolverConfig) -> Result<Outcome> {
    let s = refinement_study(kind, &[4, 8, 16], seed, cfg)?;
    let name = match kind {
        StudyKind::Helicity => "helicity",
        StudyKind::Current => "current",
        StudyKind::Conservation => "conservation",
    };
    let mut checks = vec![];
    match kind {
        StudyKind::Helicity => {
            checks.push(Check::flag("helicity error decreasing", s.decreasing, format!("{:?}", errors(&s))).criterion(10));
        }
        StudyKind::Current => {
            checks.push(Check::flag("current discrepancy decreasing", s.decreasing, format!("{:?}", errors(&s))).criterion(9));
            checks.push(Check::at_least("current fitted order", s.order.unwrap_or(f64::NAN), tol.current_order).criterion(9));
        }
        StudyKind::Conservation => {
            let worst = errors(&s).into_iter().fold(0.0, f64::max);
            checks.push(Check::at_most("conservation spread", worst, tol.conservation));
        }
    }
    let checks = checks.into_iter().map(|c| c.on(name)).collect();
    Ok(Outcome { checks, data: serde_json::to_value(&s)?, ..Default::default() })
}

fn errors(s: &crate::study::Study) -> Vec<f64> {
    s.rows.iter().map(|r| r.error).collect()
}

/// Every acceptance criterion on the standard meshes.
pub fn standard_suite(seed: u64, tol: &Tolerances, cfg: &SolverConfig, threads: usize) -> (Outcome, Option<Failure>) {
    let start = Instant::now();
    let mut jobs: Vec<Job> = Vec::new();
    for (name, res) in [("box2", 4), ("box2", 8), ("box2", 16), ("box3", 2), ("box3", 4), ("box3", 6)] {
        jobs.push(on_mesh("solver", name, res, seed, tol, cfg, |l| Ok(with_criterion(solver_block(l, 2)?, 1))));
    }
    for (name, res) in [("box2", 8), ("box3", 4), ("annulus", 3), ("solid-torus", 3)] {
        jobs.push(on_mesh("conservation", name, res, seed, tol, cfg, |l| conservation_block(l, 20, 4)));
    }
    for (name, res) in [("box2", 6), ("box3", 3), ("annulus", 3), ("solid-torus", 2)] {
        jobs.push(on_mesh("gauge", name, res, seed, tol, cfg, |l| gauge_block(l, 50)));
    }
    for (name, res) in [("box3", 3), ("annulus", 3), ("solid-torus", 2)] {
        jobs.push(on_mesh("hamilton", name, res, seed, tol, cfg, |l| hamilton_block(l, 5)));
    }
    jobs.push(on_mesh("aharonov-bohm", "annulus", 4, seed, tol, cfg, aharonov_bohm_block));
    for (name, res) in [("box2", 4), ("box3", 3)] {
        jobs.push(on_mesh("separation", name, res, seed, tol, cfg, separation_suite_block));
    }
    for (name, res) in [("box3", 3), ("annulus", 3)] {
        jobs.push(on_mesh("poisson", name, res, seed, tol, cfg, poisson_block));
    }
    for (name, res, hn, hd) in [("box3", 2, 0, 0), ("solid-torus", 2, 1, 0), ("annulus", 3, 1, 1)] {
        jobs.push(on_mesh("decompose", name, res, seed, tol, cfg, move |l| {
            let o = hmf_block(l, 100)?;
            Ok(expect_dims("h1_dirichlet_dim", hd, 7)(expect_dims("h1_neumann_dim", hn, 7)(o)))
        }));
    }
    for (name, res, k) in [("box3", 2, 0), ("solid-torus", 2, 0), ("annulus", 3, 1)] {
        jobs.push(on_mesh("boundary-map", name, res, seed, tol, cfg, move |l| {
            Ok(expect_dims("boundary_map_kernel_dim", k, 8)(boundary_map_block(l)?))
        }));
    }
    jobs.push(("study/current".into(), Box::new(move || study_job(StudyKind::Current, seed, tol, cfg))));
    jobs.push(("study/helicity".into(), Box::new(move || study_job(StudyKind::Helicity, seed, tol, cfg))));
    for pair in [GluePair::Squares, GluePair::Cubes, GluePair::Ring] {
        jobs.push((format!("glue/{pair:?}").to_lowercase(), Box::new(move || standard_gluing_block(pair, cfg))));
    }
    for (name, res) in [("box2", 4), ("box3", 2)] {
        jobs.push(on_mesh("round-trip", name, res, seed, tol, cfg, round_trip_block));
    }
    let (mut out, failure) = run_jobs(jobs, threads);
    let elapsed = start.elapsed().as_secs_f64();
    out.checks.push(Check::flag("suite time", elapsed < SUITE_BUDGET_S, format!("budget {SUITE_BUDGET_S} s")).criterion(12));
    out.timings.insert("total".into(), elapsed);
    (out, failure)
}
