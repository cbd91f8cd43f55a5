//! Mesh generators: Kuhn (Freudenthal) triangulations of boxes, annuli, solid tori
//! and flat tori.

use std::collections::HashMap;
use std::f64::consts::PI;

use itertools::Itertools;
use nalgebra::DMatrix;

use super::complex::SimplicialComplex;
use super::metric::{GridLayout, MetricData};
use crate::error::{Error, Result};

/// Radii of the generated annulus.
pub const ANNULUS_RADII: (f64, f64) = (1.0, 2.0);
/// Major radius and cross-section half-width of the generated solid torus.
pub const SOLID_TORUS_RADII: (f64, f64) = (2.0, 0.5);

/// Kuhn triangulation of a parameter grid, pushed through `map` into Euclidean
/// space. Periodic axes wrap vertex indices; each cell keeps the unwrapped image of
/// its own vertices as its frame.
fn grid_mesh<F>(layout: GridLayout, map: F) -> Result<(SimplicialComplex, MetricData)>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = layout.res.len();
    let h: Vec<f64> = (0..n).map(|a| layout.spacing(a)).collect();
    let param = |idx: &[usize]| -> Vec<f64> {
        idx.iter().enumerate().map(|(a, &i)| layout.origin[a] + i as f64 * h[a]).collect()
    };

    let num_vertices: usize = (0..n).map(|a| layout.points(a)).product();
    let mut vertex_coords = vec![Vec::new(); num_vertices];
    for idx in (0..n).map(|a| 0..layout.points(a)).multi_cartesian_product() {
        vertex_coords[layout.vertex_index(&idx)] = map(&param(&idx));
    }

    let mut cells = Vec::new();
    let mut frames: HashMap<Vec<usize>, Vec<(usize, Vec<f64>)>> = HashMap::new();
    for corner in (0..n).map(|a| 0..layout.res[a]).multi_cartesian_product() {
        for perm in (0..n).permutations(n) {
            let mut idx = corner.clone();
            let mut path = vec![(layout.vertex_index(&idx), map(&param(&idx)))];
            for &a in &perm {
                idx[a] += 1;
                path.push((layout.vertex_index(&idx), map(&param(&idx))));
            }
            let edges = DMatrix::from_fn(n, n, |i, j| path[i + 1].1[j] - path[0].1[j]);
            if edges.determinant() < 0.0 {
                path.swap(0, 1);
            }
            let cell: Vec<usize> = path.iter().map(|p| p.0).collect();
            let mut key = cell.clone();
            key.sort_unstable();
            let mut pts = path;
            pts.sort_by_key(|p| p.0);
            frames.insert(key, pts);
            cells.push(cell);
        }
    }

    let complex = SimplicialComplex::from_cells(n, num_vertices, &cells)?;
    let cell_frames = complex
        .simplices(n)
        .iter()
        .map(|c| frames[c].iter().map(|p| p.1.clone()).collect())
        .collect();
    let metric = MetricData::from_frames(&complex, vertex_coords, cell_frames)?.with_layout(layout);
    Ok((complex, metric))
}

fn check_dimension(n: usize, res: &[usize], lengths: &[f64]) -> Result<()> {
    if !(2..=4).contains(&n) {
        return Err(Error::InvalidParameter(format!("dimension {n} not in 2..=4")));
    }
    if res.len() != n || lengths.len() != n {
        return Err(Error::InvalidParameter("resolution and lengths need one entry per axis".into()));
    }
    if res.iter().any(|&r| r == 0) {
        return Err(Error::InvalidParameter("zero resolution".into()));
    }
    if lengths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::InvalidParameter("edge lengths must be positive".into()));
    }
    Ok(())
}

/// Kuhn triangulation of the box `[0, lengths]` with `res` cells per axis.
pub fn build_box(n: usize, res: &[usize], lengths: &[f64]) -> Result<(SimplicialComplex, MetricData)> {
    build_box_at(n, res, lengths, &vec![0.0; n])
}

/// Same as [`build_box`] translated to `origin`.
pub fn build_box_at(
    n: usize,
    res: &[usize],
    lengths: &[f64],
    origin: &[f64],
) -> Result<(SimplicialComplex, MetricData)> {
    check_dimension(n, res, lengths)?;
    if origin.len() != n {
        return Err(Error::InvalidParameter("origin needs one entry per axis".into()));
    }
    let layout = GridLayout {
        res: res.to_vec(),
        lengths: lengths.to_vec(),
        origin: origin.to_vec(),
        periodic: vec![false; n],
    };
    grid_mesh(layout, |p| p.to_vec())
}

/// Flat torus `(R / L)^n`, Kuhn-triangulated; needs at least 3 cells per axis.
pub fn build_flat_torus(n: usize, res: &[usize], lengths: &[f64]) -> Result<(SimplicialComplex, MetricData)> {
    check_dimension(n, res, lengths)?;
    if res.iter().any(|&r| r < 3) {
        return Err(Error::InvalidParameter("periodic axes need at least 3 cells".into()));
    }
    let layout = GridLayout {
        res: res.to_vec(),
        lengths: lengths.to_vec(),
        origin: vec![0.0; n],
        periodic: vec![true; n],
    };
    grid_mesh(layout, |p| p.to_vec())
}

/// Flat annulus `1 ≤ r ≤ 2` in the plane.
pub fn build_annulus(radial_resolution: usize, angular_segments: usize) -> Result<(SimplicialComplex, MetricData)> {
    if radial_resolution == 0 || angular_segments < 3 {
        return Err(Error::InvalidParameter(format!(
            "annulus needs radial ≥ 1 and angular ≥ 3, got {radial_resolution}, {angular_segments}"
        )));
    }
    let (r_in, r_out) = ANNULUS_RADII;
    let layout = GridLayout {
        res: vec![radial_resolution, angular_segments],
        lengths: vec![r_out - r_in, 2.0 * PI],
        origin: vec![r_in, 0.0],
        periodic: vec![false, true],
    };
    let (complex, metric) = grid_mesh(layout, |p| vec![p[0] * p[1].cos(), p[0] * p[1].sin()])?;
    Ok((complex, metric.without_layout()))
}

/// Solid torus S¹ × D² embedded in 3-space; the cross-section is a square of
/// half-width 0.5 around the circle of radius 2.
pub fn build_solid_torus(major_segments: usize, minor_resolution: usize) -> Result<(SimplicialComplex, MetricData)> {
    if major_segments < 3 || minor_resolution == 0 {
        return Err(Error::InvalidParameter(format!(
            "solid torus needs major ≥ 3 and minor ≥ 1, got {major_segments}, {minor_resolution}"
        )));
    }
    let (major, half) = SOLID_TORUS_RADII;
    let layout = GridLayout {
        res: vec![major_segments, minor_resolution, minor_resolution],
        lengths: vec![2.0 * PI, 2.0 * half, 2.0 * half],
        origin: vec![0.0, -half, -half],
        periodic: vec![true, false, false],
    };
    let (complex, metric) = grid_mesh(layout, |p| {
        let r = major + p[1];
        vec![r * p[0].cos(), r * p[0].sin(), p[2]]
    })?;
    Ok((complex, metric.without_layout()))
}
