#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ym_helix::geometry::{build_annulus, build_box, build_solid_torus};
use ym_helix::{Cochain, Dec};

pub fn box2(r: usize) -> Dec {
    let (c, m) = build_box(2, &[r, r], &[1.0, 1.0]).unwrap();
    Dec::new(c, m)
}

pub fn box3(r: usize) -> Dec {
    let (c, m) = build_box(3, &[r, r, r], &[1.0; 3]).unwrap();
    Dec::new(c, m)
}

pub fn annulus(radial: usize, angular: usize) -> Dec {
    let (c, m) = build_annulus(radial, angular).unwrap();
    Dec::new(c, m)
}

pub fn solid_torus(major: usize, minor: usize) -> Dec {
    let (c, m) = build_solid_torus(major, minor).unwrap();
    Dec::new(c, m)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_cochain(dec: &Dec, k: usize, rng: &mut ChaCha8Rng) -> Cochain {
    let values = (0..dec.complex().count(k)).map(|_| rng.random_range(-1.0..1.0)).collect();
    Cochain::from_values(dec.complex(), k, values).unwrap()
}

pub fn random_interior_vertex_fn(dec: &Dec, rng: &mut ChaCha8Rng) -> Cochain {
    let flags = dec.complex().boundary_flags(0).to_vec();
    let values = flags.iter().map(|&b| if b { 0.0 } else { rng.random_range(-1.0..1.0) }).collect();
    Cochain::from_values(dec.complex(), 0, values).unwrap()
}

pub fn angle(x: &[f64]) -> f64 {
    x[1].atan2(x[0])
}

pub fn wrap(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// Angle differences along edges: the discrete dθ.
pub fn angle_cochain(dec: &Dec) -> Cochain {
    let xs = dec.metric().vertex_coords();
    let values = dec
        .complex()
        .simplices(1)
        .iter()
        .map(|e| wrap(angle(&xs[e[1]]) - angle(&xs[e[0]])))
        .collect();
    Cochain::from_values(dec.complex(), 1, values).unwrap()
}

/// ∮ φ around the circle of radius `r` (counter-clockwise), planar meshes.
pub fn holonomy_at_radius(dec: &Dec, phi: &Cochain, r: f64) -> f64 {
    let xs = dec.metric().vertex_coords();
    let rad = |x: &[f64]| (x[0] * x[0] + x[1] * x[1]).sqrt();
    let mut total = 0.0;
    for (e, s) in dec.complex().simplices(1).iter().enumerate() {
        let (a, b) = (&xs[s[0]], &xs[s[1]]);
        if (rad(a) - r).abs() < 1e-9 && (rad(b) - r).abs() < 1e-9 {
            let dth = wrap(angle(b) - angle(a));
            total += phi.values[e] * dth.signum();
        }
    }
    total
}
