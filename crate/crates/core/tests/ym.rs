mod common;

use std::f64::consts::PI;

use common::*;
use ym_helix::solver::SolverConfig;
use ym_helix::ym::*;

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

#[test]
fn exact_boundary_data_gives_flat_solution() {
    let dec = box2(6);
    let f = dec.sample_vertex_fn(|x| (3.0 * x[0]).sin() + x[0] * x[1]);
    let df = dec.d(&f).unwrap();
    let (eta, rep) = solve_ym(&dec, &dirichlet_trace(&dec, &df).unwrap(), &cfg()).unwrap();
    assert!(curvature_norm(&dec, &eta.phi).unwrap() < 1e-10);
    assert_eq!(rep.kernel_dim, Some(0));
    let (ok, r) = is_solution(&dec, &eta, 1e-10).unwrap();
    assert!(ok, "{r}");
}

#[test]
fn zero_data_gives_zero() {
    let dec = box3(2);
    let nb = dec.complex().boundary_indices(1).len();
    let (eta, _) = solve_ym(&dec, &vec![0.0; nb], &cfg()).unwrap();
    assert_eq!(eta.phi.norm_inf(), 0.0);
}

#[test]
fn annulus_angle_form_holonomy() {
    let dec = annulus(4, 24);
    let theta = angle_cochain(&dec);
    let (eta, rep) = solve_ym(&dec, &dirichlet_trace(&dec, &theta).unwrap(), &cfg()).unwrap();
    assert_eq!(rep.kernel_dim, Some(1));
    assert!(curvature_norm(&dec, &eta.phi).unwrap() < 1e-8);
    let hol = holonomy_at_radius(&dec, &eta.phi, 1.5);
    assert!((hol - 2.0 * PI).abs() < 1e-8, "{hol}");
}

#[test]
fn random_interior_field_is_not_a_solution() {
    let dec = box2(4);
    let mut rng = rng(3);
    let phi = random_cochain(&dec, 1, &mut rng);
    let eta = Connection::from_phi(phi);
    assert!(!is_solution(&dec, &eta, 1e-8).unwrap().0);
    // gauge shifts leave the verdict and residual unchanged
    let g = GaugeTransformation::new(&dec, random_cochain(&dec, 0, &mut rng)).unwrap();
    let shifted = g.apply(&dec, &eta).unwrap();
    let (a, ra) = is_solution(&dec, &eta, 1e-8).unwrap();
    let (b, rb) = is_solution(&dec, &shifted, 1e-8).unwrap();
    assert_eq!(a, b);
    assert!((ra - rb).abs() < 1e-12);
}

#[test]
fn interior_gauge_preserves_solutions() {
    let dec = box3(3);
    let mut rng = rng(11);
    let data: Vec<f64> = dec.complex().boundary_indices(1).iter().map(|_| rng_value(&mut rng)).collect();
    let (eta, _) = solve_ym(&dec, &data, &cfg()).unwrap();
    let (_, r0) = is_solution(&dec, &eta, 1e-10).unwrap();
    assert!(r0 < 1e-10);
    for _ in 0..5 {
        let g = GaugeTransformation::new(&dec, random_interior_vertex_fn(&dec, &mut rng)).unwrap();
        assert!(g.is_interior(&dec));
        let (ok, r) = is_solution(&dec, &g.apply(&dec, &eta).unwrap(), 1e-10).unwrap();
        assert!(ok, "{r}");
    }
}

fn rng_value(rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    use rand::Rng;
    rng.random_range(-1.0..1.0)
}

#[test]
fn lorentz_gauge_fix_properties() {
    let dec = box3(3);
    let mut rng = rng(5);
    let phi = random_cochain(&dec, 1, &mut rng);
    for flavor in [Flavor::Dirichlet, Flavor::Neumann] {
        let (fixed, psi, _) = lorentz_gauge_fix(&dec, &phi, flavor, &cfg()).unwrap();
        assert!(lorentz_residual(&dec, &fixed, flavor).unwrap() < 1e-10, "{flavor:?}");
        let diff = phi.sub(&fixed).unwrap().sub(&dec.d(&psi).unwrap()).unwrap();
        assert!(diff.norm_inf() < 1e-14);
        let (_, psi2, _) = lorentz_gauge_fix(&dec, &fixed, flavor, &cfg()).unwrap();
        assert!(psi2.norm_inf() < 1e-9, "{flavor:?} {}", psi2.norm_inf());
    }
    // already coclosed in the interior: ψ = 0
    let (fixed, _, _) = lorentz_gauge_fix(&dec, &phi, Flavor::Dirichlet, &cfg()).unwrap();
    let (_, psi, _) = lorentz_gauge_fix(&dec, &fixed, Flavor::Dirichlet, &cfg()).unwrap();
    assert!(psi.norm_inf() < 1e-9);
}

#[test]
fn lorentz_fix_of_exact_field() {
    let dec = box2(8);
    let f = dec.sample_vertex_fn(|x| x[0] * x[0] - x[1] + (2.0 * x[1]).cos());
    let df = dec.d(&f).unwrap();
    let (fixed, _, _) = lorentz_gauge_fix(&dec, &df, Flavor::Dirichlet, &cfg()).unwrap();
    assert!(lorentz_residual(&dec, &fixed, Flavor::Dirichlet).unwrap() < 1e-10);
    assert!(curvature_norm(&dec, &fixed).unwrap() < 1e-12);
}

#[test]
fn harmonic_dimensions_match_betti_numbers() {
    let cases = [("box", box3(2), 0, 0), ("torus", solid_torus(6, 2), 1, 0), ("annulus", annulus(3, 12), 1, 1)];
    for (name, dec, n, d) in cases {
        let hn = harmonic_basis(&dec, Flavor::Neumann, &cfg()).unwrap();
        let hd = harmonic_basis(&dec, Flavor::Dirichlet, &cfg()).unwrap();
        assert_eq!((hn.len(), hd.len()), (n, d), "{name}");
        let b = ym_helix::geometry::betti_numbers(dec.complex(), false);
        let rb = ym_helix::geometry::betti_numbers(dec.complex(), true);
        assert_eq!((b[1], rb[1]), (n, d), "{name}");
        for h in hn.iter().chain(&hd) {
            assert!((dec.norm(h).unwrap() - 1.0).abs() < 1e-10);
            assert!(curvature_norm(&dec, h).unwrap() < 1e-8);
        }
    }
}

#[test]
fn boundary_map_kernels() {
    for (name, dec, expected) in [("box", box3(2), 0), ("torus", solid_torus(5, 2), 0), ("annulus", annulus(3, 12), 1)] {
        let bm = boundary_map(&dec, &cfg()).unwrap();
        let r = &bm.report;
        println!("{name}: {r:?}");
        assert_eq!(r.boundary_map_kernel_dim, expected, "{name}");
        assert_eq!(r.boundary_map_kernel_dim, r.relative_betti[1], "{name}");
        assert_eq!(r.boundary_map_rank + r.boundary_map_kernel_dim, r.domain_dim);
        assert_eq!(r.domain_dim, dec.complex().boundary_indices(1).len() + r.h1_dirichlet_dim);
        assert_eq!(r.fixed_dirichlet_solution_dim, r.interior_gauge_dim + r.h1_dirichlet_dim);
    }
}

#[test]
fn annulus_boundary_kernel_is_harmonic_dirichlet() {
    let dec = annulus(3, 12);
    let bm = boundary_map(&dec, &cfg()).unwrap();
    let hd = harmonic_basis(&dec, Flavor::Dirichlet, &cfg()).unwrap();
    let k = &bm.kernel[0];
    // kernel element is a multiple of the (Lorentz-gauged) harmonic generator up to interior gauge
    let proj = dec.inner(k, &hd[0]).unwrap();
    let rest = k.axpy(-proj, &hd[0]).unwrap();
    let (fixed, _, _) = lorentz_gauge_fix(&dec, &rest, Flavor::Dirichlet, &cfg()).unwrap();
    assert!(fixed.norm_inf() < 1e-8, "{}", fixed.norm_inf());
}

#[test]
fn hmf_special_inputs() {
    let dec = box3(2);
    let f = dec.sample_vertex_fn(|x| x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]) * x[2] * (1.0 - x[2]));
    let df = dec.d(&f).unwrap();
    let h = hmf_decompose(&dec, &df, &cfg()).unwrap();
    assert!(dec.norm(&h.exact_dirichlet.sub(&df).unwrap()).unwrap() < 1e-10);
    for p in &h.parts()[1..] {
        assert!(dec.norm(p).unwrap() < 1e-8);
    }

    let dec = solid_torus(6, 2);
    let hn = harmonic_basis(&dec, Flavor::Neumann, &cfg()).unwrap();
    let h = hmf_decompose(&dec, &hn[0], &cfg()).unwrap();
    assert!((dec.norm(&h.harmonic_neumann).unwrap() - 1.0).abs() < 1e-8);
    for p in [&h.exact_dirichlet, &h.harmonic_exact, &h.coexact_neumann] {
        assert!(dec.norm(p).unwrap() < 1e-8);
    }
}

#[test]
fn hmf_random_inputs() {
    for (dec, seed) in [(box3(2), 1u64), (solid_torus(5, 2), 2), (annulus(3, 10), 3)] {
        let basis = harmonic_basis(&dec, Flavor::Neumann, &cfg()).unwrap();
        let mut rng = rng(seed);
        for _ in 0..10 {
            let a = random_cochain(&dec, 1, &mut rng);
            let h = hmf_decompose_with(&dec, &a, &basis, &cfg()).unwrap();
            assert!(h.residual < 1e-8);
            assert!(h.max_orthogonality < 1e-8, "{}", h.max_orthogonality);
            assert!(h.coexact_residual < 1e-8, "{}", h.coexact_residual);
        }
    }
}

#[test]
fn gauge_equivalence() {
    let dec = box2(4);
    let mut rng = rng(9);
    let eta = Connection::from_phi(random_cochain(&dec, 1, &mut rng));
    let f = random_interior_vertex_fn(&dec, &mut rng);
    let g = GaugeTransformation::new(&dec, f.clone()).unwrap();
    let eta2 = g.apply(&dec, &eta).unwrap();
    let v = gauge_equivalent(&dec, &eta, &eta2, GaugeGroup::Interior, 1e-9, &cfg()).unwrap();
    assert!(v.equivalent);
    assert!(v.witness.unwrap().sub(&f).unwrap().norm_inf() < 1e-9);
    let same = gauge_equivalent(&dec, &eta, &eta, GaugeGroup::Free, 1e-9, &cfg()).unwrap();
    assert!(same.equivalent);
    assert_eq!(same.witness.unwrap().norm_inf(), 0.0);

    // annulus: the harmonic Dirichlet field is exact but not an interior gauge
    let dec = annulus(3, 12);
    let hd = harmonic_basis(&dec, Flavor::Dirichlet, &cfg()).unwrap();
    let eta = Connection::zero(&dec);
    let eta2 = Connection::from_phi(hd[0].clone());
    assert!(!gauge_equivalent(&dec, &eta, &eta2, GaugeGroup::Interior, 1e-9, &cfg()).unwrap().equivalent);
    assert!(gauge_equivalent(&dec, &eta, &eta2, GaugeGroup::Free, 1e-9, &cfg()).unwrap().equivalent);
    let b1 = BoundaryData::of(&dec, &eta.eta()).unwrap();
    let b2 = BoundaryData::of(&dec, &eta2.eta()).unwrap();
    let (dd, dn) = b1.max_difference(&b2);
    assert!(dd < 1e-10 && dn < 1e-10, "{dd} {dn}");
}

#[test]
fn radial_variation_is_linear() {
    let dec = box2(3);
    let mut rng = rng(2);
    assert_eq!(radial_variation(&Connection::zero(&dec)).norm_inf(), 0.0);
    let a = random_cochain(&dec, 1, &mut rng);
    let b = random_cochain(&dec, 1, &mut rng);
    let lhs = radial_variation(&Connection::from_phi(a.axpy(2.0, &b).unwrap()));
    let rhs = radial_variation(&Connection::from_phi(a.clone())).axpy(2.0, &radial_variation(&Connection::from_phi(b))).unwrap();
    assert!(lhs.sub(&rhs).unwrap().norm_inf() < 1e-15);
}

#[test]
fn boundary_data_json() {
    let dec = box2(2);
    let mut rng = rng(4);
    let a = random_cochain(&dec, 1, &mut rng);
    let b = BoundaryData::of(&dec, &a).unwrap();
    let back = BoundaryData::from_json(&dec, &b.to_json().unwrap()).unwrap();
    assert_eq!(b, back);
    let other = box2(3);
    assert!(BoundaryData::from_json(&other, &b.to_json().unwrap()).is_err());
}
