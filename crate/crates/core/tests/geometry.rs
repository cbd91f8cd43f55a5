use proptest::prelude::*;
use ym_helix::geometry::*;

#[test]
fn box_homology() {
    for (n, res) in [(2, vec![3, 2]), (3, vec![2, 2, 3]), (4, vec![1, 1, 1, 2])] {
        let lengths = vec![1.0; n];
        let (c, _) = build_box(n, &res, &lengths).unwrap();
        let mut expected = vec![0; n + 1];
        expected[0] = 1;
        assert_eq!(betti_numbers(&c, false), expected);
        let mut rel = vec![0; n + 1];
        rel[n] = 1;
        assert_eq!(betti_numbers(&c, true), rel);
        let mut sphere = vec![0; n];
        sphere[0] = 1;
        sphere[n - 1] += 1;
        assert_eq!(boundary_betti_numbers(&c), sphere);
        assert_eq!(c.euler_characteristic(), 1);
        assert!(c.check_boundary_squared());
    }
}

#[test]
fn annulus_homology() {
    let (c, _) = build_annulus(3, 12).unwrap();
    assert_eq!(betti_numbers(&c, false), vec![1, 1, 0]);
    assert_eq!(betti_numbers(&c, true), vec![0, 1, 1]);
    assert_eq!(boundary_betti_numbers(&c), vec![2, 2]);
    assert_eq!(c.euler_characteristic(), 0);
}

#[test]
fn solid_torus_homology() {
    let (c, _) = build_solid_torus(5, 2).unwrap();
    assert_eq!(betti_numbers(&c, false), vec![1, 1, 0, 0]);
    assert_eq!(betti_numbers(&c, true), vec![0, 0, 1, 1]);
    assert_eq!(boundary_betti_numbers(&c), vec![1, 2, 1]);
    assert_eq!(c.euler_characteristic(), 0);
}

#[test]
fn flat_torus_homology() {
    let (c, _) = build_flat_torus(3, &[3, 3, 3], &[1.0; 3]).unwrap();
    assert_eq!(betti_numbers(&c, false), vec![1, 3, 3, 1]);
    let (c, _) = build_flat_torus(2, &[3, 4], &[1.0; 2]).unwrap();
    assert_eq!(betti_numbers(&c, false), vec![1, 2, 1]);
}

#[test]
fn mesh_json_round_trip() {
    let (c, m) = build_box(3, &[2, 1, 2], &[1.0, 0.5, 2.0]).unwrap();
    let json = MeshJson::from_mesh(&c, &m).to_json().unwrap();
    let (c2, m2) = MeshJson::from_json(&json).unwrap().to_mesh().unwrap();
    assert_eq!(c2.fingerprint(), c.fingerprint());
    assert_eq!(c2.orientations(), c.orientations());
    for k in 0..=3 {
        for (a, b) in m.volumes(k).iter().zip(m2.volumes(k)) {
            assert!((a - b).abs() < 1e-15);
        }
    }
    assert!(MeshJson::from_json("{\"dimension\": 2}").is_err());
    let bad = MeshJson { dimension: 2, vertices: vec![vec![0.0, 0.0]; 3], cells: vec![vec![0, 1, 7]] };
    assert!(bad.to_mesh().is_err());
}

#[test]
fn relative_null_chains() {
    let (c, _) = build_annulus(2, 8).unwrap();
    // a boundary chain is null
    let mut coeffs = vec![0i64; c.count(1)];
    for (e, _) in c.faces(2, 0) {
        coeffs[*e] = 0;
    }
    for &(e, s) in c.faces(2, 3) {
        coeffs[e] += s as i64;
    }
    assert!(is_relatively_null(&c, &coeffs));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn euler_poincare(n in 2usize..4, r0 in 1usize..4, r1 in 1usize..4, r2 in 1usize..3) {
        let res = [r0, r1, r2];
        let (c, m) = build_box(n, &res[..n], &vec![1.0; n]).unwrap();
        let b = betti_numbers(&c, false);
        let alt: i64 = b.iter().enumerate().map(|(k, &x)| if k % 2 == 0 { x as i64 } else { -(x as i64) }).sum();
        prop_assert_eq!(alt, c.euler_characteristic());
        prop_assert!(c.check_boundary_squared());
        prop_assert!(c.is_coherently_oriented());
        prop_assert!((m.total_volume(&c) - 1.0).abs() < 1e-12);
        prop_assert!(m.frame_consistency(&c) < 1e-14);
    }

    #[test]
    fn dual_volumes_partition_the_region(r in 1usize..4, s in 1usize..4) {
        let (c, m) = build_box(2, &[r, s], &[1.0, 2.0]).unwrap();
        for k in [0, 2] {
            let total: f64 = (0..c.count(k)).map(|i| m.volume(k, i) * m.dual_volume(k, i)).sum();
            prop_assert!((total - 2.0).abs() < 1e-12, "k={} total={}", k, total);
        }
    }
}
