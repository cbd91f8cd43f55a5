mod common;

use std::f64::consts::PI;

use common::*;
use proptest::prelude::*;
use ym_helix::geometry::build_flat_torus;
use ym_helix::linalg;
use ym_helix::solver::{nullspace_sparse, SolverConfig};
use ym_helix::{Cochain, Dec, StarKind};

fn torus3(r: usize) -> Dec {
    let (c, m) = build_flat_torus(3, &[r, r, r], &[2.0 * PI; 3]).unwrap();
    Dec::new(c, m)
}

fn helicity(dec: &Dec) -> f64 {
    let a = dec.sample_one_form(|x| vec![x[2].cos(), x[2].sin(), 0.0]);
    let da = dec.d(&a).unwrap();
    dec.integrate_top(&dec.cup(&a, &da).unwrap()).unwrap()
}

#[test]
fn helicity_converges_on_torus() {
    let exact = -(2.0 * PI).powi(3);
    let errs: Vec<f64> = [4, 8, 16].iter().map(|&r| (helicity(&torus3(r)) - exact).abs()).collect();
    eprintln!("helicity errors {errs:?}");
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    assert!(errs[2] < 0.05 * exact.abs(), "{errs:?}");
}

#[test]
fn helicity_is_gauge_invariant() {
    let dec = torus3(4);
    let mut rng = rng(3);
    let a = dec.sample_one_form(|x| vec![x[2].cos(), x[2].sin(), 0.0]);
    let h0 = helicity(&dec);
    for _ in 0..10 {
        let f = random_cochain(&dec, 0, &mut rng);
        let b = a.add(&dec.d(&f).unwrap()).unwrap();
        let db = dec.d(&b).unwrap();
        let h = dec.integrate_top(&dec.cup(&b, &db).unwrap()).unwrap();
        assert!((h - h0).abs() < 1e-10 * h0.abs(), "{h} {h0}");
    }
}

#[test]
fn codifferential_squares_to_zero() {
    for kind in [StarKind::Whitney, StarKind::Barycentric] {
        let (c, m) = ym_helix::geometry::build_box(3, &[2, 2, 2], &[1.0; 3]).unwrap();
        let dec = Dec::with_star(c, m, kind);
        let mut rng = rng(5);
        for k in 2..=3 {
            let b = random_cochain(&dec, k, &mut rng);
            let dd = dec.delta(&dec.delta(&b).unwrap()).unwrap();
            assert!(dd.norm_inf() < 1e-9 * (1.0 + b.norm_inf()), "{kind:?} k={k}: {}", dd.norm_inf());
        }
    }
}

#[test]
fn adjointness() {
    let dec = box3(2);
    let mut rng = rng(6);
    for k in 0..3 {
        let a = random_cochain(&dec, k, &mut rng);
        let b = random_cochain(&dec, k + 1, &mut rng);
        let lhs = dec.inner(&dec.d(&a).unwrap(), &b).unwrap();
        let rhs = dec.inner(&a, &dec.delta(&b).unwrap()).unwrap();
        assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()), "k={k}: {lhs} {rhs}");
    }
}

#[test]
fn vertex_laplacian_kernel_on_closed_complex() {
    let dec = torus3(3);
    let l = dec.laplacian0();
    let kernel = nullspace_sparse(&l, Some(dec.star(0).matrix()), &SolverConfig::default()).unwrap();
    assert_eq!(kernel.len(), 1);
    let k = &kernel[0];
    let mean = k.iter().sum::<f64>() / k.len() as f64;
    assert!(k.iter().all(|x| (x - mean).abs() < 1e-10));
}

#[test]
fn angle_form_is_coclosed() {
    let errs: Vec<f64> = [(2, 12), (4, 24), (8, 48)]
        .iter()
        .map(|&(r, a)| {
            let dec = annulus(r, a);
            let th = angle_cochain(&dec);
            assert!(dec.d(&th).unwrap().norm_inf() < 1e-12);
            let div = dec.weak_divergence(&th).unwrap();
            let w = dec.star(0).weights().unwrap().to_vec();
            dec.complex()
                .interior_indices(0)
                .iter()
                .map(|&v| (div[v] / w[v]).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    // rotational symmetry of the mesh makes dθ discretely harmonic
    assert!(errs.iter().all(|&e| e < 1e-10), "{errs:?}");
}

#[test]
fn cup_needs_three_dimensions() {
    let dec = box2(2);
    assert!(dec.cup(&dec.zeros(1), &dec.zeros(1)).is_err());
}

#[test]
fn cochain_json_and_mismatch() {
    let dec = box2(3);
    let mut rng = rng(7);
    let a = random_cochain(&dec, 1, &mut rng);
    let back = Cochain::from_json(dec.complex(), &a.to_json().unwrap()).unwrap();
    assert_eq!(back.values, a.values);
    let other = box2(4);
    assert!(Cochain::from_json(other.complex(), &a.to_json().unwrap()).is_err());
    assert!(other.d(&a).is_err());
    assert!(dec.d(&dec.zeros(2)).is_err());
}

#[test]
fn stars_are_positive() {
    for dec in [box3(2), annulus(2, 8), solid_torus(4, 1)] {
        for k in 0..=dec.dim() {
            let m = linalg::to_dense(dec.star(k).matrix());
            let eig = m.symmetric_eigenvalues();
            assert!(eig.iter().all(|&l| l > 0.0), "k={k}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dd_vanishes(seed in 0u64..1000, n in 2usize..4) {
        let dec = if n == 2 { box2(3) } else { box3(2) };
        let mut rng = rng(seed);
        for k in 0..n - 1 {
            let a = random_cochain(&dec, k, &mut rng);
            let dd = dec.d(&dec.d(&a).unwrap()).unwrap();
            prop_assert!(dd.norm_inf() < 1e-12);
        }
    }

    #[test]
    fn energy_matches_stiffness(seed in 0u64..1000) {
        let dec = box3(2);
        let mut rng = rng(seed);
        let a = random_cochain(&dec, 1, &mut rng);
        let ka = dec.apply_stiffness(&a).unwrap();
        let e1 = linalg::dot(&a.values, &ka.values);
        let e2 = dec.norm(&dec.d(&a).unwrap()).unwrap().powi(2);
        prop_assert!((e1 - e2).abs() < 1e-10 * (1.0 + e2));
    }
}
