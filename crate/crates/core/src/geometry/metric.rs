use itertools::Itertools;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::complex::SimplicialComplex;
use crate::error::{Error, Result};

/// Structured-grid layout of a generated box or periodic mesh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridLayout {
    pub res: Vec<usize>,
    pub lengths: Vec<f64>,
    pub origin: Vec<f64>,
    pub periodic: Vec<bool>,
}

impl GridLayout {
    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.res[axis] as f64
    }

    /// Number of grid points along `axis`.
    pub fn points(&self, axis: usize) -> usize {
        if self.periodic[axis] {
            self.res[axis]
        } else {
            self.res[axis] + 1
        }
    }

    pub fn vertex_index(&self, idx: &[usize]) -> usize {
        let mut stride = 1;
        let mut out = 0;
        for (a, &i) in idx.iter().enumerate() {
            out += (i % self.points(a)) * stride;
            stride *= self.points(a);
        }
        out
    }
}

/// Piecewise-flat metric given by one Euclidean coordinate frame per top cell.
///
/// Cells listed in the frame carry their vertices in sorted order. Volumes of lower
/// simplices come from any containing cell; frames of neighbouring cells must agree
/// on shared edge lengths.
#[derive(Clone, Debug)]
pub struct MetricData {
    ambient: usize,
    vertex_coords: Vec<Vec<f64>>,
    cell_frames: Vec<Vec<Vec<f64>>>,
    volumes: Vec<Vec<f64>>,
    dual_volumes: Vec<Vec<f64>>,
    layout: Option<GridLayout>,
}

pub(crate) fn simplex_volume(points: &[&[f64]]) -> f64 {
    let m = points.len() - 1;
    if m == 0 {
        return 1.0;
    }
    let gram = edge_gram(points);
    let det = gram.determinant().max(0.0);
    det.sqrt() / factorial(m)
}

pub(crate) fn edge_gram(points: &[&[f64]]) -> DMatrix<f64> {
    let m = points.len() - 1;
    let p0 = points[0];
    let edges: Vec<Vec<f64>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect())
        .collect();
    DMatrix::from_fn(m, m, |i, j| edges[i].iter().zip(&edges[j]).map(|(a, b)| a * b).sum())
}

pub(crate) fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

fn barycenter(points: &[&[f64]]) -> Vec<f64> {
    let d = points[0].len();
    let mut b = vec![0.0; d];
    for p in points {
        for (x, y) in b.iter_mut().zip(p.iter()) {
            *x += y;
        }
    }
    b.iter_mut().for_each(|x| *x /= points.len() as f64);
    b
}

impl MetricData {
    /// Metric from global vertex coordinates (an actual embedding).
    pub fn from_coordinates(complex: &SimplicialComplex, coords: Vec<Vec<f64>>) -> Result<Self> {
        if coords.len() != complex.num_vertices() {
            return Err(Error::LengthMismatch { expected: complex.num_vertices(), found: coords.len() });
        }
        let frames = complex
            .simplices(complex.dim())
            .iter()
            .map(|cell| cell.iter().map(|&v| coords[v].clone()).collect())
            .collect();
        Self::from_frames(complex, coords, frames)
    }

    /// Metric from per-cell frames; `vertex_coords` are representative positions
    /// used for cut construction and reporting only.
    pub fn from_frames(
        complex: &SimplicialComplex,
        vertex_coords: Vec<Vec<f64>>,
        cell_frames: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let n = complex.dim();
        if cell_frames.len() != complex.count(n) {
            return Err(Error::LengthMismatch { expected: complex.count(n), found: cell_frames.len() });
        }
        let ambient = cell_frames[0][0].len();
        if ambient < n {
            return Err(Error::InvalidMesh(format!("ambient dimension {ambient} < {n}")));
        }
        for frame in &cell_frames {
            if frame.len() != n + 1 || frame.iter().any(|p| p.len() != ambient) {
                return Err(Error::InvalidMesh("malformed cell frame".into()));
            }
            if frame.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::InvalidMesh("non-finite coordinate".into()));
            }
        }
        let mut metric = Self {
            ambient,
            vertex_coords,
            cell_frames,
            volumes: Vec::new(),
            dual_volumes: Vec::new(),
            layout: None,
        };
        metric.volumes = (0..=n)
            .map(|k| (0..complex.count(k)).map(|i| metric.compute_volume(complex, k, i)).collect())
            .collect();
        metric.dual_volumes = metric.compute_dual_volumes(complex);
        for k in 0..=n {
            if let Some(i) = (0..complex.count(k)).find(|&i| metric.volumes[k][i] <= 0.0) {
                return Err(Error::InvalidMesh(format!(
                    "degenerate {k}-simplex {:?}",
                    complex.simplex(k, i)
                )));
            }
            if let Some(i) = (0..complex.count(k)).find(|&i| metric.dual_volumes[k][i] <= 0.0) {
                return Err(Error::InvalidMesh(format!(
                    "non-positive dual volume on {k}-simplex {:?}",
                    complex.simplex(k, i)
                )));
            }
        }
        Ok(metric)
    }

    pub(crate) fn with_layout(mut self, layout: GridLayout) -> Self {
        self.layout = Some(layout);
        self
    }

    pub(crate) fn without_layout(mut self) -> Self {
        self.layout = None;
        self
    }

    pub fn layout(&self) -> Option<&GridLayout> {
        self.layout.as_ref()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn vertex_coords(&self) -> &[Vec<f64>] {
        &self.vertex_coords
    }

    pub fn cell_frame(&self, c: usize) -> &[Vec<f64>] {
        &self.cell_frames[c]
    }

    pub fn volume(&self, k: usize, i: usize) -> f64 {
        self.volumes[k][i]
    }

    pub fn volumes(&self, k: usize) -> &[f64] {
        &self.volumes[k]
    }

    /// Barycentric dual volume of the k-simplex `i`.
    pub fn dual_volume(&self, k: usize, i: usize) -> f64 {
        self.dual_volumes[k][i]
    }

    pub fn dual_volumes(&self, k: usize) -> &[f64] {
        &self.dual_volumes[k]
    }

    pub fn total_volume(&self, complex: &SimplicialComplex) -> f64 {
        self.volumes[complex.dim()].iter().sum()
    }

    /// Points of `simplex` in the frame of `cell`.
    pub(crate) fn points_in_cell<'a>(
        &'a self,
        complex: &SimplicialComplex,
        cell: usize,
        simplex: &[usize],
    ) -> Vec<&'a [f64]> {
        complex
            .local_positions(cell, simplex)
            .into_iter()
            .map(|p| self.cell_frames[cell][p].as_slice())
            .collect()
    }

    fn compute_volume(&self, complex: &SimplicialComplex, k: usize, i: usize) -> f64 {
        let cell = complex.cells_containing(k, i)[0];
        simplex_volume(&self.points_in_cell(complex, cell, complex.simplex(k, i)))
    }

    /// Portion of the barycentric dual of `simplex` lying inside `cell`.
    pub fn barycentric_dual_part(&self, complex: &SimplicialComplex, cell: usize, simplex: &[usize]) -> f64 {
        let n = complex.dim();
        let k = simplex.len() - 1;
        if k == n {
            return 1.0;
        }
        let cell_vertices = complex.simplex(n, cell);
        let rest: Vec<usize> = cell_vertices.iter().copied().filter(|v| !simplex.contains(v)).collect();
        let mut total = 0.0;
        for order in rest.iter().copied().permutations(rest.len()) {
            let mut current: Vec<usize> = simplex.to_vec();
            let mut centers = vec![barycenter(&self.points_in_cell(complex, cell, &current))];
            for v in order {
                current.push(v);
                centers.push(barycenter(&self.points_in_cell(complex, cell, &current)));
            }
            let refs: Vec<&[f64]> = centers.iter().map(Vec::as_slice).collect();
            total += simplex_volume(&refs);
        }
        total
    }

    fn compute_dual_volumes(&self, complex: &SimplicialComplex) -> Vec<Vec<f64>> {
        let n = complex.dim();
        let mut out: Vec<Vec<f64>> = (0..=n).map(|k| vec![0.0; complex.count(k)]).collect();
        for (c, cell) in complex.simplices(n).iter().enumerate() {
            for (k, dual) in out.iter_mut().enumerate() {
                for face in cell.iter().copied().combinations(k + 1) {
                    let idx = complex.find(&face).expect("face of cell");
                    dual[idx] += self.barycentric_dual_part(complex, c, &face);
                }
            }
        }
        out
    }

    /// Euclidean length of edge `e` measured in each cell containing it; returns
    /// the maximum disagreement between frames.
    pub fn frame_consistency(&self, complex: &SimplicialComplex) -> f64 {
        let mut worst: f64 = 0.0;
        for e in 0..complex.count(1) {
            let cells = complex.cells_containing(1, e);
            let lengths: Vec<f64> = cells
                .iter()
                .map(|&c| simplex_volume(&self.points_in_cell(complex, c, complex.simplex(1, e))))
                .collect();
            let (lo, hi) = lengths
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(lo, hi), &l| (lo.min(l), hi.max(l)));
            worst = worst.max(hi - lo);
        }
        worst
    }

    /// Barycenter of the k-simplex `i` in representative vertex coordinates.
    pub fn barycenter_of(&self, complex: &SimplicialComplex, k: usize, i: usize) -> Vec<f64> {
        let pts: Vec<&[f64]> = complex.simplex(k, i).iter().map(|&v| self.vertex_coords[v].as_slice()).collect();
        barycenter(&pts)
    }

    /// Barycenter of top cell `c` in its own frame.
    pub fn cell_barycenter(&self, c: usize) -> Vec<f64> {
        let pts: Vec<&[f64]> = self.cell_frames[c].iter().map(Vec::as_slice).collect();
        barycenter(&pts)
    }
}
