//! Building blocks shared by the subcommands and the verification suite. Each
//! block returns its checks, a JSON payload and the time spent in solves.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use ym_helix::geometry::{betti_numbers, MetricData, SimplicialComplex};
use ym_helix::gluing::{
    canonical_form, glue, glue_self, glue_solutions, gluing_dimension_check, restrict, split, GluingMap, Glued,
};
use ym_helix::observables::{
    bracket_observable, hamilton_check, helicity_observable, poisson_bracket, separation_certificate,
    symplectic_pairing, CandidateCut, Hypersurface, Observable, Separation, SeparationOptions,
};
use ym_helix::solver::SolverConfig;
use ym_helix::ym::{
    boundary_map, dirichlet_trace, harmonic_basis, hmf_decompose_with, solve_ym, BoundaryData, Connection, Flavor,
    GaugeTransformation,
};
use ym_helix::{Cochain, Dec, Result};

use crate::config::{stream, GluePair, Tolerances};
use crate::report::Check;

#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub data: Value,
    pub timings: BTreeMap<String, f64>,
}

impl Outcome {
    pub fn merge(&mut self, key: &str, other: Outcome) {
        self.checks.extend(other.checks);
        if let Value::Object(map) = &mut self.data {
            map.insert(key.to_string(), other.data);
        } else {
            self.data = json!({ key: other.data });
        }
        for (k, v) in other.timings {
            self.timings.insert(format!("{key}/{k}"), v);
        }
    }
}

/// A mesh together with everything a block needs to run on it.
pub struct Lab<'a> {
    pub dec: &'a Dec,
    pub name: String,
    pub seed: u64,
    pub tol: &'a Tolerances,
    pub cfg: &'a SolverConfig,
}

impl Lab<'_> {
    fn rng(&self, stream_id: u64) -> ChaCha8Rng {
        stream(self.seed, stream_id)
    }

    fn tag(&self, check: Check) -> Check {
        check.on(&self.name)
    }
}

pub fn random_cochain(dec: &Dec, k: usize, rng: &mut ChaCha8Rng) -> Cochain {
    let values = (0..dec.complex().count(k)).map(|_| rng.random_range(-1.0..1.0)).collect();
    Cochain::from_values(dec.complex(), k, values).expect("sized to the complex")
}

/// Solution with uniformly random tangential boundary data.
pub fn random_solution(dec: &Dec, rng: &mut ChaCha8Rng, cfg: &SolverConfig) -> Result<Cochain> {
    let nb = dec.complex().boundary_indices(1).len();
    let data: Vec<f64> = (0..nb).map(|_| rng.random_range(-1.0..1.0)).collect();
    Ok(solve_ym(dec, &data, cfg)?.0.eta())
}

/// The cut at the middle of the x-range of the mesh.
pub fn default_cut(dec: &Dec) -> Result<(CandidateCut, Hypersurface)> {
    let canonical = CandidateCut::canonical(dec);
    let cut = canonical[0];
    Ok((cut, cut.build(dec)?))
}

fn relative_spread(values: &[f64]) -> f64 {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (hi - lo) / scale
}

/// Solver residual and run time on random boundary data.
pub fn solver_block(lab: &Lab, solves: usize) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut worst = 0.0f64;
    let mut slowest = 0.0f64;
    let mut iterations = Vec::new();
    for i in 0..solves {
        let mut rng = lab.rng(100 + i as u64);
        let nb = lab.dec.complex().boundary_indices(1).len();
        let data: Vec<f64> = (0..nb).map(|_| rng.random_range(-1.0..1.0)).collect();
        let start = Instant::now();
        let (eta, report) = solve_ym(lab.dec, &data, lab.cfg)?;
        slowest = slowest.max(start.elapsed().as_secs_f64());
        let k = lab.dec.apply_stiffness(&eta.eta())?;
        let r = lab.dec.complex().interior_indices(1).iter().fold(0.0f64, |m, &e| m.max(k.values[e].abs()));
        worst = worst.max(r);
        iterations.push(report.iterations);
    }
    out.checks.push(lab.tag(Check::at_most("solve residual", worst, lab.tol.residual)));
    out.checks.push(lab.tag(Check::flag(
        "solve time",
        slowest < lab.tol.solve_seconds,
        format!("slowest solve within {} s", lab.tol.solve_seconds),
    )));
    out.timings.insert("slowest_solve".into(), slowest);
    out.data = json!({ "solves": solves, "max_interior_residual": worst, "iterations": iterations });
    Ok(out)
}

/// Cells none of whose edges lie in ∂U.
fn deep_cells(dec: &Dec) -> Vec<usize> {
    let c = dec.complex();
    (0..c.count(c.dim())).filter(|&k| dec.cell_edges(k).iter().all(|&e| !c.is_boundary(1, e))).collect()
}

/// `count` cuts obtained from `base` by flipping cells away from ∂U.
pub fn deformed_cuts(dec: &Dec, base: &Hypersurface, rng: &mut ChaCha8Rng, count: usize) -> Vec<Hypersurface> {
    let Some(minus) = base.minus_cells() else { return vec![base.clone()] };
    let deep = deep_cells(dec);
    let mut out = vec![base.clone()];
    let mut attempts = 0;
    while out.len() < count && attempts < 50 * count && !deep.is_empty() {
        attempts += 1;
        let mut m = minus.to_vec();
        for &c in &deep {
            if rng.random_bool(0.4) {
                m[c] = !m[c];
            }
        }
        if let Ok(s) = Hypersurface::from_bipartition(dec.complex(), m) {
            if !out.iter().any(|o| o.faces() == s.faces()) {
                out.push(s);
            }
        }
    }
    out
}

/// Cut independence of f^φ_Σ(η) and ω_Σ(v, w) over homologous cuts.
pub fn conservation_block(lab: &Lab, pairs: usize, cuts: usize) -> Result<Outcome> {
    let mut out = Outcome::default();
    let (base_id, base) = default_cut(lab.dec)?;
    let mut rng = lab.rng(200);
    let family = deformed_cuts(lab.dec, &base, &mut rng, cuts);
    let homologous = family.iter().all(|s| s.homologous_to(&family[0], lab.dec.complex()));
    out.checks.push(lab.tag(Check::at_least("homologous cuts", family.len() as f64, 3.0).criterion(2)));
    out.checks.push(lab.tag(Check::flag("cuts pairwise homologous", homologous, format!("{} cuts", family.len())).criterion(2)));
    let mut worst_f = 0.0f64;
    let mut worst_w = 0.0f64;
    for i in 0..pairs {
        let mut rng = lab.rng(300 + i as u64);
        let phi = random_solution(lab.dec, &mut rng, lab.cfg)?;
        let eta = Connection::from_phi(random_solution(lab.dec, &mut rng, lab.cfg)?);
        let v = random_solution(lab.dec, &mut rng, lab.cfg)?;
        let w = random_solution(lab.dec, &mut rng, lab.cfg)?;
        let f: Vec<f64> = family.iter().map(|s| helicity_observable(lab.dec, &phi, s, &eta)).collect::<Result<_>>()?;
        let o: Vec<f64> = family.iter().map(|s| symplectic_pairing(lab.dec, s, &v, &w)).collect::<Result<_>>()?;
        worst_f = worst_f.max(relative_spread(&f));
        worst_w = worst_w.max(relative_spread(&o));
    }
    out.checks.push(lab.tag(Check::at_most("observable conservation", worst_f, lab.tol.conservation).criterion(2)));
    out.checks.push(lab.tag(Check::at_most("pairing conservation", worst_w, lab.tol.conservation).criterion(2)));
    out.data = json!({
        "base_cut": base_id.to_string(),
        "cuts": family.len(),
        "pairs": pairs,
        "max_relative_spread_observable": worst_f,
        "max_relative_spread_pairing": worst_w,
    });
    Ok(out)
}

/// f^φ_Σ(η + df) = f^φ_Σ(η) for interior gauge functions f.
pub fn gauge_block(lab: &Lab, trials: usize) -> Result<Outcome> {
    let mut out = Outcome::default();
    let (cut_id, sigma) = default_cut(lab.dec)?;
    let mut rng = lab.rng(400);
    let phi = random_solution(lab.dec, &mut rng, lab.cfg)?;
    let eta = Connection::from_phi(random_solution(lab.dec, &mut rng, lab.cfg)?);
    let f0 = helicity_observable(lab.dec, &phi, &sigma, &eta)?;
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let g = GaugeTransformation::interior(lab.dec, random_cochain(lab.dec, 0, &mut rng))?;
        let f1 = helicity_observable(lab.dec, &phi, &sigma, &g.apply(lab.dec, &eta)?)?;
        worst = worst.max((f1 - f0).abs() / (1.0 + f0.abs()));
    }
    out.checks.push(lab.tag(Check::at_most("gauge invariance", worst, lab.tol.gauge).criterion(3)));
    out.data = json!({ "cut": cut_id.to_string(), "trials": trials, "value": f0, "max_relative_change": worst });
    Ok(out)
}

fn observables(lab: &Lab, count: usize, stream_id: u64) -> Result<(Vec<Observable>, Connection, ChaCha8Rng)> {
    let (cut_id, sigma) = default_cut(lab.dec)?;
    let mut rng = lab.rng(stream_id);
    let obs = (0..count)
        .map(|i| {
            let phi = random_solution(lab.dec, &mut rng, lab.cfg)?;
            Observable::with_ids(lab.dec, phi, sigma.clone(), &format!("random{i}"), &cut_id.to_string())
        })
        .collect::<Result<Vec<_>>>()?;
    let eta = Connection::from_phi(random_solution(lab.dec, &mut rng, lab.cfg)?);
    Ok((obs, eta, rng))
}

/// L_w f^φ = −ω(v_φ, w) for solutions w.
pub fn hamilton_block(lab: &Lab, trials: usize) -> Result<Outcome> {
    let mut out = Outcome::default();
    let (obs, eta, mut rng) = observables(lab, 3, 500)?;
    let mut worst = 0.0f64;
    for o in &obs {
        for _ in 0..trials {
            let w = random_solution(lab.dec, &mut rng, lab.cfg)?;
            worst = worst.max(hamilton_check(lab.dec, o, &eta, &w)?);
        }
    }
    out.checks.push(lab.tag(Check::at_most("hamilton", worst, lab.tol.hamilton).criterion(4)));
    out.data = json!({ "observables": obs.len(), "trials": trials, "max_discrepancy": worst });
    Ok(out)
}

/// Antisymmetry, Jacobi and bracket = directional derivative.
pub fn poisson_block(lab: &Lab) -> Result<Outcome> {
    let mut out = Outcome::default();
    let (obs, eta, _) = observables(lab, 3, 600)?;
    let mut antisym = 0.0f64;
    let mut lie = 0.0f64;
    let mut matrix = vec![vec![0.0; obs.len()]; obs.len()];
    for (i, a) in obs.iter().enumerate() {
        for (j, b) in obs.iter().enumerate() {
            let ab = poisson_bracket(lab.dec, a, b)?;
            let ba = poisson_bracket(lab.dec, b, a)?;
            antisym = antisym.max((ab + ba).abs());
            let d = b.lie_derivative(lab.dec, &eta, &a.hamiltonian_field())?;
            lie = lie.max((ab - d).abs() / (1.0 + ab.abs()));
            matrix[i][j] = ab;
        }
    }
    let (a, b, c) = (&obs[0], &obs[1], &obs[2]);
    let jacobi = poisson_bracket(lab.dec, &bracket_observable(lab.dec, a, b)?, c)?
        + poisson_bracket(lab.dec, &bracket_observable(lab.dec, b, c)?, a)?
        + poisson_bracket(lab.dec, &bracket_observable(lab.dec, c, a)?, b)?;
    out.checks.push(lab.tag(Check::at_most("bracket antisymmetry", antisym, 0.0).criterion(6)));
    out.checks.push(lab.tag(Check::at_most("jacobi", jacobi.abs(), 0.0).criterion(6)));
    out.checks.push(lab.tag(Check::at_most("bracket vs directional derivative", lie, lab.tol.bracket).criterion(6)));
    out.data = json!({ "brackets": matrix, "jacobi": jacobi, "max_lie_discrepancy": lie });
    Ok(out)
}

/// Decomposition of random 1-cochains and harmonic dimensions.
pub fn hmf_block(lab: &Lab, samples: usize) -> Result<Outcome> {
    let mut out = Outcome::default();
    let basis = harmonic_basis(lab.dec, Flavor::Neumann, lab.cfg)?;
    let hd = harmonic_basis(lab.dec, Flavor::Dirichlet, lab.cfg)?.len();
    let b1 = betti_numbers(lab.dec.complex(), false)[1];
    let rb1 = betti_numbers(lab.dec.complex(), true)[1];
    out.checks.push(lab.tag(Check::equal("dim H1_N = b1", basis.len(), b1).criterion(7)));
    out.checks.push(lab.tag(Check::equal("dim H1_D = relative b1", hd, rb1).criterion(7)));
    let mut rng = lab.rng(700);
    let (mut res, mut orth, mut coex) = (0.0f64, 0.0f64, 0.0f64);
    let mut first = None;
    for _ in 0..samples {
        let a = random_cochain(lab.dec, 1, &mut rng);
        let h = hmf_decompose_with(lab.dec, &a, &basis, lab.cfg)?;
        res = res.max(h.residual);
        orth = orth.max(h.max_orthogonality);
        coex = coex.max(h.coexact_residual);
        if first.is_none() {
            first = Some(h);
        }
    }
    out.checks.push(lab.tag(Check::at_most("decomposition reconstruction", res, lab.tol.decomposition).criterion(7)));
    out.checks.push(lab.tag(Check::at_most("decomposition orthogonality", orth, lab.tol.decomposition).criterion(7)));
    out.checks.push(lab.tag(Check::at_most("coexact part", coex, lab.tol.decomposition)));
    out.data = json!({
        "samples": samples,
        "h1_neumann_dim": basis.len(),
        "h1_dirichlet_dim": hd,
        "betti1": b1,
        "relative_betti1": rb1,
        "max_residual": res,
        "max_orthogonality": orth,
        "max_coexact_residual": coex,
        "first": first,
    });
    Ok(out)
}

pub fn boundary_map_block(lab: &Lab) -> Result<Outcome> {
    let mut out = Outcome::default();
    let bm = boundary_map(lab.dec, lab.cfg)?;
    let r = &bm.report;
    out.checks.push(lab.tag(Check::equal("boundary map kernel = relative b1", r.boundary_map_kernel_dim, r.relative_betti[1]).criterion(8)));
    out.checks.push(lab.tag(Check::equal("rank + kernel = domain", r.boundary_map_rank + r.boundary_map_kernel_dim, r.domain_dim)));
    out.checks.push(lab.tag(Check::equal(
        "fixed-data solutions = gauge + H1_D",
        r.fixed_dirichlet_solution_dim,
        r.interior_gauge_dim + r.h1_dirichlet_dim,
    )));
    out.data = serde_json::to_value(r)?;
    Ok(out)
}

/// Solution with the Dirichlet data of ½(−y dx + x dy).
fn uniform_field(dec: &Dec, cfg: &SolverConfig) -> Result<Cochain> {
    let s = dec.sample_one_form(|x| {
        let mut v = vec![0.0; x.len()];
        v[0] = -0.5 * x[1];
        v[1] = 0.5 * x[0];
        v
    });
    let t = dirichlet_trace(dec, &s)?;
    Ok(solve_ym(dec, &t, cfg)?.0.eta())
}

/// η and η + h for the harmonic Dirichlet field h: same boundary data, told
/// apart by the observable of the uniform field on the angle cut.
pub fn aharonov_bohm_block(lab: &Lab) -> Result<Outcome> {
    let mut out = Outcome::default();
    let hd = harmonic_basis(lab.dec, Flavor::Dirichlet, lab.cfg)?;
    let Some(h) = hd.into_iter().next() else {
        out.checks.push(lab.tag(Check::flag("aharonov-bohm pair", false, "no harmonic Dirichlet field on this mesh").criterion(5)));
        return Ok(out);
    };
    let mut rng = lab.rng(800);
    let eta = Connection::from_phi(random_solution(lab.dec, &mut rng, lab.cfg)?);
    let eta2 = eta.shifted(1.0, &h)?;
    let (dd, dn) = BoundaryData::of(lab.dec, &eta.eta())?.max_difference(&BoundaryData::of(lab.dec, &eta2.eta())?);
    out.checks.push(lab.tag(Check::at_most("identical boundary data", dd.max(dn), 1e-10).criterion(5)));

    let phi = uniform_field(lab.dec, lab.cfg)?;
    let sigma = Hypersurface::angle_cut(lab.dec.complex(), lab.dec.metric(), 0.0)?;
    let diff = helicity_observable(lab.dec, &phi, &sigma, &eta2)? - helicity_observable(lab.dec, &phi, &sigma, &eta)?;
    let area = lab.dec.metric().total_volume(lab.dec.complex());
    let field = lab.dec.integrate_top(&lab.dec.d(&phi)?)? / area;
    let period: f64 = sigma.faces().iter().map(|&(f, s)| s as f64 * h.values[f]).sum();
    let oracle = 0.5 * field * period;
    let rel = (diff - oracle).abs() / oracle.abs();
    out.checks.push(lab.tag(Check::at_most("aharonov-bohm difference vs holonomy", rel, lab.tol.aharonov_bohm).criterion(5)));

    let verdict = separation_certificate(lab.dec, &eta, &eta2, &SeparationOptions { solver: lab.cfg.clone(), ..Default::default() })?;
    out.checks.push(lab.tag(Check::flag(
        "aharonov-bohm pair separated",
        matches!(verdict, Separation::Separated { .. }),
        verdict_name(&verdict),
    ).criterion(5)));
    out.data = json!({
        "difference": diff,
        "oracle": oracle,
        "relative_error": rel,
        "boundary_data_difference": [dd, dn],
        "verdict": verdict,
    });
    Ok(out)
}

pub fn verdict_name(v: &Separation) -> &'static str {
    match v {
        Separation::GaugeWitness { .. } => "gauge_witness",
        Separation::Separated { .. } => "separated",
        Separation::Undecided { .. } => "undecided",
    }
}

/// Standard pairs: gauge-related, independent and nearby solutions. Every
/// verdict must be a witness or a separation.
pub fn separation_suite_block(lab: &Lab) -> Result<Outcome> {
    let mut out = Outcome::default();
    let opts = SeparationOptions { solver: lab.cfg.clone(), ..Default::default() };
    let mut rng = lab.rng(900);
    let mut verdicts = Vec::new();
    let mut undecided = 0;
    let mut wrong = Vec::new();
    for i in 0..5 {
        let eta = Connection::from_phi(random_solution(lab.dec, &mut rng, lab.cfg)?);
        let (other, expect_witness) = match i {
            0 | 1 => (GaugeTransformation::interior(lab.dec, random_cochain(lab.dec, 0, &mut rng))?.apply(lab.dec, &eta)?, true),
            2 | 3 => (Connection::from_phi(random_solution(lab.dec, &mut rng, lab.cfg)?), false),
            _ => (eta.shifted(1e-3, &random_solution(lab.dec, &mut rng, lab.cfg)?)?, false),
        };
        let v = separation_certificate(lab.dec, &eta, &other, &opts)?;
        let ok = if expect_witness {
            matches!(v, Separation::GaugeWitness { .. })
        } else {
            matches!(v, Separation::Separated { .. })
        };
        if matches!(v, Separation::Undecided { .. }) {
            undecided += 1;
        }
        if !ok {
            wrong.push(i);
        }
        verdicts.push(v);
    }
    out.checks.push(lab.tag(Check::equal("undecided verdicts", undecided, 0).criterion(5)));
    out.checks.push(lab.tag(Check::flag("expected verdicts", wrong.is_empty(), format!("unexpected verdicts for pairs {wrong:?}"))));
    out.data = json!({ "verdicts": verdicts });
    Ok(out)
}

type Mesh = (SimplicialComplex, MetricData);

fn mesh_pair(pair: GluePair) -> Result<(Mesh, Option<Mesh>, GluingMap)> {
    use ym_helix::geometry::{build_box, build_box_at};
    let id = |x: &[f64]| x.to_vec();
    match pair {
        GluePair::Squares => {
            let a = build_box_at(2, &[2, 2], &[1.0, 1.0], &[0.0, 0.0])?;
            let b = build_box_at(2, &[2, 2], &[1.0, 1.0], &[1.0, 0.0])?;
            let map = GluingMap::by_coordinates((&a.0, &a.1), (&b.0, &b.1), id, 1e-9)?;
            Ok((a, Some(b), map))
        }
        GluePair::Cubes => {
            let a = build_box_at(3, &[1, 1, 1], &[1.0; 3], &[0.0; 3])?;
            let b = build_box_at(3, &[1, 1, 1], &[1.0; 3], &[1.0, 0.0, 0.0])?;
            let map = GluingMap::by_coordinates((&a.0, &a.1), (&b.0, &b.1), id, 1e-9)?;
            Ok((a, Some(b), map))
        }
        GluePair::Ring => {
            let u = build_box(3, &[3, 2, 2], &[3.0, 1.0, 1.0])?;
            let map = GluingMap::by_coordinates((&u.0, &u.1), (&u.0, &u.1), |x| vec![x[0] - 3.0, x[1], x[2]], 1e-9)?;
            Ok((u, None, map))
        }
    }
}

/// Glue two meshes (or one to itself) and compare solution-space dimensions.
pub fn gluing_dimension_block(first: &Mesh, second: Option<&Mesh>, map: &GluingMap, name: &str, cfg: &SolverConfig) -> Result<(Outcome, Glued)> {
    let mut out = Outcome::default();
    let glued = match second {
        Some(b) => glue((&first.0, &first.1), (&b.0, &b.1), map)?,
        None => glue_self((&first.0, &first.1), map)?,
    };
    let d1 = Dec::new(first.0.clone(), first.1.clone());
    let d2 = second.map(|b| Dec::new(b.0.clone(), b.1.clone()));
    let r = gluing_dimension_check(&d1, d2.as_ref(), map, &glued, cfg)?;
    out.checks.push(Check::equal("glued dimension", r.pieces_dim, r.glued_dim).criterion(11).on(name));
    out.data = json!({
        "map": map,
        "f_vector": glued.complex.f_vector(),
        "betti": betti_numbers(&glued.complex, false),
        "dimension": r,
    });
    Ok((out, glued))
}

pub fn standard_gluing_block(pair: GluePair, cfg: &SolverConfig) -> Result<Outcome> {
    let (a, b, map) = mesh_pair(pair)?;
    let name = serde_json::to_value(pair)?.as_str().unwrap_or("pair").to_string();
    let (mut out, glued) = gluing_dimension_block(&a, b.as_ref(), &map, &name, cfg)?;
    match pair {
        GluePair::Squares => {
            let direct = ym_helix::geometry::build_box(2, &[4, 2], &[2.0, 1.0])?;
            out.checks.push(Check::flag(
                "matches the long box",
                canonical_form(&glued.complex, &glued.metric) == canonical_form(&direct.0, &direct.1),
                "canonical forms",
            ).on(&name));
        }
        GluePair::Cubes => {
            let direct = ym_helix::geometry::build_box(3, &[2, 1, 1], &[2.0, 1.0, 1.0])?;
            out.checks.push(Check::flag(
                "matches the long box",
                canonical_form(&glued.complex, &glued.metric) == canonical_form(&direct.0, &direct.1),
                "canonical forms",
            ).on(&name));
        }
        GluePair::Ring => {
            out.checks.push(Check::equal("ring b1", betti_numbers(&glued.complex, false)[1], 1).on(&name));
        }
    }
    Ok(out)
}

/// Split a solution along the x-midplane, re-glue the halves and compare bitwise.
pub fn round_trip_block(lab: &Lab) -> Result<Outcome> {
    let mut out = Outcome::default();
    let c = lab.dec.complex();
    let m = lab.dec.metric();
    let n = c.dim();
    let mut rng = lab.rng(1000);
    let eta = random_solution(lab.dec, &mut rng, lab.cfg)?;
    let xs = m.vertex_coords();
    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x[0]), b.max(x[0])));
    let mid = 0.5 * (lo + hi);
    let minus: Vec<bool> = (0..c.count(n)).map(|k| m.cell_barycenter(k)[0] < mid).collect();
    let s = split(c, m, &minus)?;
    let d1 = Dec::new(s.lower.0.clone(), s.lower.1.clone());
    let d2 = Dec::new(s.upper.0.clone(), s.upper.1.clone());
    let e1 = restrict(c, &eta, &s.lower.0, &s.lower_vertices)?;
    let e2 = restrict(c, &eta, &s.upper.0, &s.upper_vertices)?;
    let g = glue((&s.lower.0, &s.lower.1), (&s.upper.0, &s.upper.1), &s.map)?;
    let gd = g.dec();
    let (back, report) = glue_solutions(&d1, &e1, &d2, &e2, &s.map, &g, &gd, lab.tol.trace)?;
    let values = back.eta().values;
    let mut to_glued = vec![0; c.num_vertices()];
    for (i, &v) in s.lower_vertices.iter().enumerate() {
        to_glued[v] = g.from_first[i];
    }
    for (i, &v) in s.upper_vertices.iter().enumerate() {
        to_glued[v] = g.from_second[i];
    }
    let mut differing = 0;
    for (e, edge) in c.simplices(1).iter().enumerate() {
        let (a, b) = (to_glued[edge[0]], to_glued[edge[1]]);
        let ge = gd.complex().find(&[a, b]).expect("glued edge");
        let v = if a < b { values[ge] } else { -values[ge] };
        if v.to_bits() != eta.values[e].to_bits() {
            differing += 1;
        }
    }
    out.checks.push(lab.tag(Check::equal("round trip differing edges", differing, 0).criterion(11)));
    out.checks.push(lab.tag(Check::flag(
        "round trip mesh",
        canonical_form(&g.complex, &g.metric) == canonical_form(c, m),
        "canonical forms",
    )));
    out.checks.push(lab.tag(Check::at_most("glued residual", report.glued_residual.unwrap_or(f64::INFINITY), lab.tol.residual)));
    let (pieces, _) = gluing_dimension_block(&s.lower, Some(&s.upper), &s.map, &lab.name, lab.cfg)?;
    out.checks.extend(pieces.checks);
    out.data = json!({ "trace": report, "edges": c.count(1), "differing": differing, "dimension": pieces.data["dimension"] });
    Ok(out)
}
