//! Executes one experiment and assembles its report.

use std::path::Path;

use serde_json::json;
use ym_helix::geometry::{betti_numbers, boundary_betti_numbers, MeshJson, MetricData, SimplicialComplex};
use ym_helix::gluing::GluingMap;
use ym_helix::observables::{
    poisson_bracket, separation_certificate, symplectic_pairing, CandidateCut, CandidateGenerator, Observable,
    ObservableRecord, Separation, SeparationOptions,
};
use ym_helix::ym::{
    curvature_norm, gauge_equivalent, harmonic_basis, is_solution, lorentz_gauge_fix, lorentz_residual, solve_ym,
    Connection, Flavor, GaugeGroup, GaugeTransformation,
};
use ym_helix::{Cochain, Dec, Error, Result};

use crate::blocks::*;
use crate::config::{stream, Experiment, ExperimentConfig, PairKind, StudyKind};
use crate::report::{Check, Failure, Report};
use crate::study::refinement_study;
use crate::suite::{mesh_suite, standard_suite};

/// Run the configured experiment. Errors become a failure record in the report.
/// Timings are attached only when `timings` is set.
pub fn run(config: &ExperimentConfig, timings: bool) -> Report {
    let (outcome, failure) = match execute(config) {
        Ok(r) => r,
        Err(e) => (Outcome::default(), Some(Failure::from(e))),
    };
    let mut report = Report::new(config.clone(), outcome.checks, outcome.data, failure);
    if timings {
        report.timings = Some(outcome.timings);
    }
    report
}

fn lab<'a>(config: &'a ExperimentConfig, dec: &'a Dec) -> Result<Lab<'a>> {
    Ok(Lab { dec, name: config.mesh()?.to_string(), seed: config.seed, tol: &config.tolerances, cfg: &config.solver })
}

fn ok(o: Outcome) -> Result<(Outcome, Option<Failure>)> {
    Ok((o, None))
}

fn execute(config: &ExperimentConfig) -> Result<(Outcome, Option<Failure>)> {
    let cfg = &config.solver;
    let tol = &config.tolerances;
    if let Experiment::Verify = config.experiment {
        return match &config.mesh {
            Some(spec) => mesh_suite(spec, config.seed, tol, cfg, config.threads),
            None => Ok(standard_suite(config.seed, tol, cfg, config.threads)),
        };
    }
    if let Experiment::Study { study, resolutions } = &config.experiment {
        return ok(study_outcome(*study, resolutions, config)?);
    }
    if let Experiment::Glue { pair, first, second, map } = &config.experiment {
        return ok(match (pair, first) {
            (_, Some(first)) => glue_files(first, second.as_deref(), map.as_deref(), config)?,
            (Some(p), None) => standard_gluing_block(*p, cfg)?,
            (None, None) => standard_gluing_block(crate::config::GluePair::Squares, cfg)?,
        });
    }

    let spec = config.mesh()?;
    let dec = spec.dec()?;
    let l = lab(config, &dec)?;
    let mut rng = stream(config.seed, 0);
    let out = match &config.experiment {
        Experiment::Mesh => mesh_outcome(dec.complex(), dec.metric())?,
        Experiment::Solve { data } => {
            let trace = if data == "random" {
                let nb = dec.complex().boundary_indices(1).len();
                (0..nb).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect()
            } else {
                let g: CandidateGenerator = data.parse()?;
                ym_helix::ym::dirichlet_trace(&dec, &g.build(&dec, cfg)?)?
            };
            let (eta, mut report) = solve_ym(&dec, &trace, cfg)?;
            let (_, residual) = is_solution(&dec, &eta, tol.residual)?;
            let secs = std::mem::take(&mut report.wall_time_s);
            let mut o = Outcome::default();
            o.checks.push(Check::at_most("interior residual", residual, tol.residual).on(spec));
            o.checks.push(Check::flag("solve time", secs < tol.solve_seconds, format!("within {} s", tol.solve_seconds)).on(spec));
            o.timings.insert("solve".into(), secs);
            o.data = json!({ "data": data, "report": report, "residual": residual, "connection": eta });
            o
        }
        Experiment::GaugeFix { flavor } => {
            let flavor = match flavor.as_str() {
                "dirichlet" => Flavor::Dirichlet,
                "neumann" => Flavor::Neumann,
                other => return Err(Error::InvalidParameter(format!("unknown flavor '{other}' (dirichlet, neumann)"))),
            };
            let sol = random_solution(&dec, &mut rng, cfg)?;
            let g = GaugeTransformation::interior(&dec, random_cochain(&dec, 0, &mut rng))?;
            let phi = g.apply(&dec, &Connection::from_phi(sol))?.eta();
            let (fixed, psi, mut report) = lorentz_gauge_fix(&dec, &phi, flavor, cfg)?;
            report.wall_time_s = 0.0;
            let lorentz = lorentz_residual(&dec, &fixed, flavor)?;
            let split = phi.sub(&fixed)?.sub(&dec.d(&psi)?)?.norm_inf();
            let group = match flavor {
                Flavor::Dirichlet => GaugeGroup::Interior,
                Flavor::Neumann => GaugeGroup::Free,
            };
            let verdict = gauge_equivalent(&dec, &Connection::from_phi(phi.clone()), &Connection::from_phi(fixed.clone()), group, 1e-8, cfg)?;
            let (_, residual) = is_solution(&dec, &Connection::from_phi(fixed.clone()), tol.residual)?;
            let mut o = Outcome::default();
            o.checks.push(Check::at_most("lorentz residual", lorentz, tol.lorentz).on(spec));
            o.checks.push(Check::at_most("phi = fixed + d psi", split, 1e-12 * (1.0 + phi.norm_inf())).on(spec));
            o.checks.push(Check::flag("gauge equivalent to input", verdict.equivalent, format!("residual {:e}", verdict.residual)).on(spec));
            o.checks.push(Check::at_most("still a solution", residual, tol.residual).on(spec));
            o.data = json!({ "flavor": flavor, "report": report, "fixed": fixed, "psi": psi, "lorentz_residual": lorentz });
            o
        }
        Experiment::Decompose { samples } => hmf_block(&l, *samples)?,
        Experiment::Harmonic => {
            let mut o = Outcome::default();
            let b = betti_numbers(dec.complex(), false);
            let rb = betti_numbers(dec.complex(), true);
            let hn = harmonic_basis(&dec, Flavor::Neumann, cfg)?;
            let hd = harmonic_basis(&dec, Flavor::Dirichlet, cfg)?;
            o.checks.push(Check::equal("dim H1_N = b1", hn.len(), b[1]).on(spec));
            o.checks.push(Check::equal("dim H1_D = relative b1", hd.len(), rb[1]).on(spec));
            let mut worst_norm = 0.0f64;
            let mut worst_curv = 0.0f64;
            for h in hn.iter().chain(&hd) {
                worst_norm = worst_norm.max((dec.norm(h)? - 1.0).abs());
                worst_curv = worst_curv.max(curvature_norm(&dec, h)?);
            }
            o.checks.push(Check::at_most("unit norm", worst_norm, 1e-10).on(spec));
            o.checks.push(Check::at_most("closed", worst_curv, 1e-8).on(spec));
            o.data = json!({ "betti": b, "relative_betti": rb, "neumann": hn, "dirichlet": hd });
            o
        }
        Experiment::BoundaryMap => boundary_map_block(&l)?,
        Experiment::Observe { generator, cut, connection } => {
            let g: CandidateGenerator = generator.parse()?;
            let c: CandidateCut = cut.parse()?;
            let (eta, connection_id) = match connection {
                Some(path) => (load_connection(&dec, path)?, path.display().to_string()),
                None => (Connection::from_phi(random_solution(&dec, &mut rng, cfg)?), format!("random:{}", config.seed)),
            };
            let obs = Observable::with_ids(&dec, g.build(&dec, cfg)?, c.build(&dec)?, &g.to_string(), &c.to_string())?;
            let ev = obs.evaluate_checked(&dec, &eta, tol.trace)?;
            let record = ObservableRecord::new(&obs, &connection_id, &ev);
            let mut o = Outcome::default();
            o.checks.push(Check::flag("residuals within tolerance", ev.warnings.is_empty(), ev.warnings.join("; ")).on(spec));
            o.data = json!({
                "record": record,
                "csv": format!("{}\n{}\n", ObservableRecord::CSV_HEADER, record.csv_row()),
            });
            o
        }
        Experiment::Bracket { gen1, gen2, cut } => {
            let c: CandidateCut = cut.parse()?;
            let sigma = c.build(&dec)?;
            let mk = |id: &str| -> Result<Observable> {
                let g: CandidateGenerator = id.parse()?;
                Observable::with_ids(&dec, g.build(&dec, cfg)?, sigma.clone(), id, cut)
            };
            let (a, b) = (mk(gen1)?, mk(gen2)?);
            let ab = poisson_bracket(&dec, &a, &b)?;
            let ba = poisson_bracket(&dec, &b, &a)?;
            let pairing = symplectic_pairing(&dec, &sigma, &a.hamiltonian_field(), &b.hamiltonian_field())?;
            let eta = Connection::from_phi(random_solution(&dec, &mut rng, cfg)?);
            let lie = b.lie_derivative(&dec, &eta, &a.hamiltonian_field())?;
            let mut o = Outcome::default();
            o.checks.push(Check::at_most("bracket = pairing of hamiltonian fields", (ab - pairing).abs(), 0.0).on(spec));
            o.checks.push(Check::at_most("antisymmetry", (ab + ba).abs(), 0.0).on(spec));
            o.checks.push(Check::at_most("bracket vs directional derivative", (ab - lie).abs() / (1.0 + ab.abs()), tol.bracket).on(spec));
            o.data = json!({ "gen1": gen1, "gen2": gen2, "cut": cut, "bracket": ab, "reverse": ba, "pairing": pairing, "lie_derivative": lie });
            o
        }
        Experiment::Hamilton { generator, cut, trials } => {
            let g: CandidateGenerator = generator.parse()?;
            let c: CandidateCut = cut.parse()?;
            let obs = Observable::with_ids(&dec, g.build(&dec, cfg)?, c.build(&dec)?, generator, cut)?;
            let eta = Connection::from_phi(random_solution(&dec, &mut rng, cfg)?);
            let mut values = Vec::new();
            for _ in 0..*trials {
                let w = random_solution(&dec, &mut rng, cfg)?;
                values.push(ym_helix::observables::hamilton_check(&dec, &obs, &eta, &w)?);
            }
            let worst = values.iter().copied().fold(0.0, f64::max);
            let mut o = Outcome::default();
            o.checks.push(Check::at_most("hamilton", worst, tol.hamilton).on(spec));
            o.data = json!({ "generator": generator, "cut": cut, "discrepancies": values });
            o
        }
        Experiment::Separate { pair, connection, other } => separate(&l, *pair, connection.as_deref(), other.as_deref())?,
        Experiment::Verify | Experiment::Study { .. } | Experiment::Glue { .. } => unreachable!("handled above"),
    };
    ok(out)
}

fn separate(l: &Lab, pair: Option<PairKind>, a: Option<&Path>, b: Option<&Path>) -> Result<Outcome> {
    let dec = l.dec;
    let opts = SeparationOptions { solver: l.cfg.clone(), ..Default::default() };
    let mut rng = stream(l.seed, 0);
    let (eta, eta2, expect) = match (a, b, pair) {
        (Some(a), Some(b), _) => (load_connection(dec, a)?, load_connection(dec, b)?, None),
        (None, None, Some(PairKind::AharonovBohm) | None) => return aharonov_bohm_block(l),
        (None, None, Some(PairKind::Gauge)) => {
            let eta = Connection::from_phi(random_solution(dec, &mut rng, l.cfg)?);
            let g = GaugeTransformation::interior(dec, random_cochain(dec, 0, &mut rng))?;
            let other = g.apply(dec, &eta)?;
            (eta, other, Some("gauge_witness"))
        }
        (None, None, Some(PairKind::Random)) => {
            let eta = Connection::from_phi(random_solution(dec, &mut rng, l.cfg)?);
            let other = Connection::from_phi(random_solution(dec, &mut rng, l.cfg)?);
            (eta, other, Some("separated"))
        }
        _ => return Err(Error::InvalidParameter("give both --connection and --other, or a --pair".into())),
    };
    let verdict = separation_certificate(dec, &eta, &eta2, &opts)?;
    let name = verdict_name(&verdict);
    let mut o = Outcome::default();
    o.checks.push(Check::flag("decided", !matches!(verdict, Separation::Undecided { .. }), name).on(&l.name));
    if let Some(e) = expect {
        o.checks.push(Check::equal("verdict", name, e).on(&l.name));
    }
    o.data = json!({ "verdict": verdict });
    Ok(o)
}

fn mesh_outcome(c: &SimplicialComplex, m: &MetricData) -> Result<Outcome> {
    let mut o = Outcome::default();
    o.checks.push(Check::flag("boundary of boundary vanishes", c.check_boundary_squared(), "integer boundary matrices"));
    o.checks.push(Check::flag("coherently oriented", c.is_coherently_oriented(), "top cells"));
    o.data = json!({
        "f_vector": c.f_vector(),
        "euler_characteristic": c.euler_characteristic(),
        "betti": betti_numbers(c, false),
        "relative_betti": betti_numbers(c, true),
        "boundary_betti": boundary_betti_numbers(c),
        "volume": m.total_volume(c),
        "mesh": MeshJson::from_mesh(c, m),
    });
    Ok(o)
}

fn study_outcome(kind: StudyKind, resolutions: &[usize], config: &ExperimentConfig) -> Result<Outcome> {
    let s = refinement_study(kind, resolutions, config.seed, &config.solver)?;
    let errs: Vec<f64> = s.rows.iter().map(|r| r.error).collect();
    let mut o = Outcome::default();
    match kind {
        StudyKind::Helicity => o.checks.push(Check::flag("error decreasing", s.decreasing, format!("{errs:?}"))),
        StudyKind::Current => {
            o.checks.push(Check::flag("discrepancy decreasing", s.decreasing, format!("{errs:?}")));
            o.checks.push(Check::at_least("fitted order", s.order.unwrap_or(f64::NAN), config.tolerances.current_order));
        }
        StudyKind::Conservation => {
            o.checks.push(Check::at_most("conservation spread", errs.iter().copied().fold(0.0, f64::max), 1e-11));
        }
    }
    o.data = json!({ "study": s, "csv": s.to_csv()? });
    Ok(o)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))
}

/// A connection file holds either a full connection or a bare 1-cochain.
pub fn load_connection(dec: &Dec, path: &Path) -> Result<Connection> {
    let text = read(path)?;
    if let Ok(c) = serde_json::from_str::<Connection>(&text) {
        let eta0 = Cochain::from_values(dec.complex(), c.eta0.degree, c.eta0.values)?;
        let phi = Cochain::from_values(dec.complex(), c.phi.degree, c.phi.values)?;
        return Connection::new(eta0, phi);
    }
    let phi = Cochain::from_json(dec.complex(), &text)?;
    phi.check(dec.complex(), 1)?;
    Ok(Connection::from_phi(phi))
}

fn load_mesh(path: &Path) -> Result<(SimplicialComplex, MetricData)> {
    MeshJson::from_json(&read(path)?)?.to_mesh()
}

fn glue_files(first: &Path, second: Option<&Path>, map: Option<&Path>, config: &ExperimentConfig) -> Result<Outcome> {
    let a = load_mesh(first)?;
    let b = second.map(load_mesh).transpose()?;
    let partner = b.as_ref().unwrap_or(&a);
    let map = match map {
        Some(p) => GluingMap::from_json(&read(p)?)?,
        None if b.is_some() => GluingMap::by_coordinates((&a.0, &a.1), (&partner.0, &partner.1), |x| x.to_vec(), 1e-9)?,
        None => return Err(Error::InvalidParameter("self-gluing needs --map".into())),
    };
    let (mut o, glued) = gluing_dimension_block(&a, b.as_ref(), &map, "files", &config.solver)?;
    if let serde_json::Value::Object(m) = &mut o.data {
        m.insert("glued_mesh".into(), serde_json::to_value(MeshJson::from_mesh(&glued.complex, &glued.metric))?);
    }
    Ok(o)
}
