use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use ym_helix::geometry::{build_annulus, build_box};
use ym_helix::solver::SolverConfig;
use ym_helix::ym::{dirichlet_trace, harmonic_basis, solve_ym, Flavor};
use ym_helix::Dec;
use ym_helix_cli::{run, Experiment, ExperimentConfig, MeshSpec, Status};

fn ym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ym-helix")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report on stdout")
}

#[test]
fn verify_example_passes() {
    let out = ym(&["verify", "--mesh", "box3", "--res", "4", "--seed", "7"]);
    let r = report(&out);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(r["status"], "pass");
    assert!(r["checks"].as_array().unwrap().len() > 20);
}

#[test]
fn reports_reproduce() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = ["observe", "--mesh", "box2", "--res", "5", "--generator", "x1dx0", "--cut", "x:0.5", "--seed", "3"];
    assert_eq!(ym(&[&args[..], &["--out", a.to_str().unwrap()]].concat()).status.code(), Some(0));
    assert_eq!(ym(&[&args[..], &["--out", b.to_str().unwrap()]].concat()).status.code(), Some(0));
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    // rerun from the embedded configuration
    let out = ym(&["rerun", a.to_str().unwrap()]);
    assert_eq!(out.stdout, first);
}

#[test]
fn threads_do_not_change_results() {
    let one = ym(&["verify", "--mesh", "box2", "--res", "4", "--seed", "2"]);
    let four = ym(&["verify", "--mesh", "box2", "--res", "4", "--seed", "2", "--threads", "4"]);
    let (a, b) = (report(&one), report(&four));
    assert_eq!(a["checks"], b["checks"]);
    assert_eq!(a["data"], b["data"]);
}

#[test]
fn exit_codes() {
    assert_eq!(ym(&["mesh", "--mesh", "sphere"]).status.code(), Some(2));
    assert_eq!(ym(&["observe", "--mesh", "box2", "--generator", "dx0", "--cut", "q:1"]).status.code(), Some(2));
    assert_eq!(ym(&["observe", "--mesh", "box2", "--generator", "dx7", "--cut", "x:0.5"]).status.code(), Some(2));
    assert_eq!(ym(&["study", "--resolutions", "4,8"]).status.code(), Some(2));
    assert_eq!(ym(&["solve", "--mesh", "box2", "--tol", "1e-2"]).status.code(), Some(1));

    let mut cfg = ExperimentConfig::new(Experiment::Solve { data: "random".into() }, Some(MeshSpec::new("box2", Some(6)).unwrap()), 0);
    cfg.solver = SolverConfig { max_iter: 2, ..Default::default() };
    let r = run(&cfg, false);
    assert_eq!(r.status, Status::SolverFailure);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    std::fs::write(&path, serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(ym(&["rerun", path.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn observe_against_holonomy() {
    // for the uniform field B, f^h on the circle r = 1.5 is ±½ B ∮h
    let (c, m) = build_annulus(4, 24).unwrap();
    let dec = Dec::new(c, m);
    let cfg = SolverConfig::default();
    let s = dec.sample_one_form(|x| vec![-0.5 * x[1], 0.5 * x[0]]);
    let eta = solve_ym(&dec, &dirichlet_trace(&dec, &s).unwrap(), &cfg).unwrap().0;
    let b = dec.integrate_top(&dec.d(&eta.eta()).unwrap()).unwrap() / dec.metric().total_volume(dec.complex());
    let h = harmonic_basis(&dec, Flavor::Neumann, &cfg).unwrap().remove(0);
    // ∮h over the circle r = 1.5, oriented counterclockwise
    let radius: Vec<f64> = dec.metric().vertex_coords().iter().map(|x| x[0].hypot(x[1])).collect();
    let xs = dec.metric().vertex_coords();
    let holonomy: f64 = dec
        .complex()
        .simplices(1)
        .iter()
        .enumerate()
        .filter(|(_, e)| (radius[e[0]] - 1.5).abs() < 1e-9 && (radius[e[1]] - 1.5).abs() < 1e-9)
        .map(|(i, e)| {
            let turn = xs[e[0]][0] * xs[e[1]][1] - xs[e[0]][1] * xs[e[1]][0];
            h.values[i] * turn.signum()
        })
        .sum();
    let oracle = 0.5 * b * holonomy;

    let dir = tempfile::tempdir().unwrap();
    let conn = dir.path().join("eta.json");
    std::fs::write(&conn, serde_json::to_string(&eta).unwrap()).unwrap();
    let out = ym(&[
        "observe", "--mesh", "annulus", "--res", "4", "--generator", "harmonic0", "--cut", "radial:1.5",
        "--connection", conn.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let value = report(&out)["data"]["record"]["value"].as_f64().unwrap();
    assert!(oracle.abs() > 1e-3);
    assert!((value.abs() - oracle.abs()).abs() < 0.05 * oracle.abs(), "value {value} oracle {oracle}");
}

#[test]
fn bracket_is_the_pairing() {
    let out = ym(&["bracket", "--mesh", "box3", "--res", "3", "--gen1", "x1dx0", "--gen2", "x2dx1", "--cut", "x:0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let d = &report(&out)["data"];
    assert_eq!(d["bracket"], d["pairing"]);
    assert_eq!(d["bracket"].as_f64().unwrap(), -d["reverse"].as_f64().unwrap());
}

fn mesh_file(dir: &Path, name: &str, res: &str, origin_shift: f64) -> std::path::PathBuf {
    let out = ym(&["mesh", "--mesh", name, "--res", res]);
    let mut mesh = report(&out)["data"]["mesh"].clone();
    for v in mesh["vertices"].as_array_mut().unwrap() {
        let x = v[0].as_f64().unwrap() + origin_shift;
        v[0] = x.into();
    }
    let path = dir.join(format!("{name}_{origin_shift}.json"));
    std::fs::write(&path, mesh.to_string()).unwrap();
    path
}

#[test]
fn glue_mesh_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = mesh_file(dir.path(), "box2", "3", 0.0);
    let b = mesh_file(dir.path(), "box2", "3", 1.0);
    let out = ym(&["glue", "--first", a.to_str().unwrap(), "--second", b.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    let glued: ym_helix::geometry::MeshJson = serde_json::from_value(r["data"]["glued_mesh"].clone()).unwrap();
    let (gc, gm) = glued.to_mesh().unwrap();
    let (dc, dm) = build_box(2, &[6, 3], &[2.0, 1.0]).unwrap();
    assert_eq!(ym_helix::gluing::canonical_form(&gc, &gm), ym_helix::gluing::canonical_form(&dc, &dm));
    assert_eq!(r["data"]["dimension"]["equal"], true);

    // a mesh file is also a valid --mesh
    let out = ym(&["harmonic", "--mesh", a.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn study_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("h.csv");
    let out = ym(&["study", "--kind", "helicity", "--resolutions", "3,4,6", "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "resolution,h,value,reference,error");
    assert_eq!(lines.len(), 5);
    assert!(lines[4].starts_with("# fitted order,"));
}
