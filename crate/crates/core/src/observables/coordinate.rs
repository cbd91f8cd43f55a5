//! Coordinate-based cross-checks on structured boxes: the helicity current from
//! finite-difference component fields, and the component commutator field.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::{flux_pairing, helicity_observable, Hypersurface};
use crate::dec::{Cochain, Dec};
use crate::error::{Error, Result};
use crate::geometry::GridLayout;
use crate::ym::Connection;

/// Sampled component fields on the vertex grid of a box.
struct Grid<'a> {
    layout: &'a GridLayout,
    strides: Vec<usize>,
    h: Vec<f64>,
}

impl<'a> Grid<'a> {
    fn of(dec: &'a Dec) -> Result<Self> {
        let layout = dec
            .metric()
            .layout()
            .ok_or_else(|| Error::InvalidMesh("coordinate formulas need a structured box mesh".into()))?;
        let n = layout.res.len();
        let mut strides = Vec::with_capacity(n);
        let mut s = 1;
        for a in 0..n {
            strides.push(s);
            s *= layout.points(a);
        }
        let h = (0..n).map(|a| layout.spacing(a)).collect();
        Ok(Self { layout, strides, h })
    }

    fn dim(&self) -> usize {
        self.h.len()
    }

    fn index(&self, v: usize) -> Vec<usize> {
        (0..self.dim()).map(|a| (v / self.strides[a]) % self.layout.points(a)).collect()
    }

    /// Neighbour of `idx` one step along `axis` (`up` or down), if it exists.
    fn step(&self, idx: &[usize], axis: usize, up: bool) -> Option<usize> {
        let p = self.layout.points(axis);
        let mut j = idx.to_vec();
        if up {
            if idx[axis] + 1 >= p && !self.layout.periodic[axis] {
                return None;
            }
            j[axis] = (idx[axis] + 1) % p;
        } else {
            if idx[axis] == 0 && !self.layout.periodic[axis] {
                return None;
            }
            j[axis] = (idx[axis] + p - 1) % p;
        }
        Some(self.layout.vertex_index(&j))
    }

    /// Centred (one-sided at walls) difference of a vertex field along `axis`.
    fn diff(&self, g: &[f64], v: usize, axis: usize) -> f64 {
        let idx = self.index(v);
        match (self.step(&idx, axis, false), self.step(&idx, axis, true)) {
            (Some(a), Some(b)) => (g[b] - g[a]) / (2.0 * self.h[axis]),
            (None, Some(b)) => (g[b] - g[v]) / self.h[axis],
            (Some(a), None) => (g[v] - g[a]) / self.h[axis],
            (None, None) => 0.0,
        }
    }

    /// Vertex component fields of a 1-cochain from its axis-edge values.
    fn components(&self, dec: &Dec, x: &Cochain) -> Vec<Vec<f64>> {
        let c = dec.complex();
        let along = |a: usize, b: usize| -> f64 {
            let e = c.find(&[a, b]).expect("axis edge");
            if a < b {
                x.values[e]
            } else {
                -x.values[e]
            }
        };
        (0..self.dim())
            .map(|axis| {
                (0..c.num_vertices())
                    .map(|v| {
                        let idx = self.index(v);
                        let (lo, hi) = (self.step(&idx, axis, false), self.step(&idx, axis, true));
                        match (lo, hi) {
                            (Some(a), Some(b)) => (along(a, v) + along(v, b)) / (2.0 * self.h[axis]),
                            (None, Some(b)) => along(v, b) / self.h[axis],
                            (Some(a), None) => along(a, v) / self.h[axis],
                            (None, None) => 0.0,
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Coordinate helicity current through the grid plane x_axis = position.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoordinateCurrent {
    pub axis: usize,
    pub position: f64,
    /// (vertex, density) on the plane.
    pub density: Vec<(usize, f64)>,
    /// Trapezoid integral of the density.
    pub integral: f64,
    /// Flux(η; φ) − Flux(φ; η) on the same cut.
    pub pairing: f64,
    pub discrepancy: f64,
}

/// Evaluate Σ_j (φ_j F^η_{kj} − η_j F^φ_{kj}) on the interior grid plane
/// x_k = origin + plane·h_k and compare with the flux-pairing kernel.
pub fn helicity_current_coordinate(dec: &Dec, phi: &Cochain, eta: &Connection, axis: usize, plane: usize) -> Result<CoordinateCurrent> {
    let grid = Grid::of(dec)?;
    let n = grid.dim();
    if axis >= n || plane == 0 || plane >= grid.layout.res[axis] || grid.layout.periodic[axis] {
        return Err(Error::InvalidParameter(format!("plane {plane} on axis {axis} is not an interior grid plane")));
    }
    phi.check(dec.complex(), 1)?;
    let a = eta.eta();
    let cp = grid.components(dec, phi);
    let ca = grid.components(dec, &a);
    let curl = |c: &[Vec<f64>], v: usize, j: usize| grid.diff(&c[j], v, axis) - grid.diff(&c[axis], v, j);

    let position = grid.layout.origin[axis] + plane as f64 * grid.h[axis];
    let mut density = Vec::new();
    let mut integral = 0.0;
    let others: Vec<usize> = (0..n).filter(|&b| b != axis).collect();
    for idx in others.iter().map(|&b| 0..grid.layout.points(b)).multi_cartesian_product() {
        let mut full = vec![0; n];
        full[axis] = plane;
        let mut weight = 1.0;
        for (&b, &i) in others.iter().zip(&idx) {
            full[b] = i;
            let wall = !grid.layout.periodic[b] && (i == 0 || i == grid.layout.res[b]);
            weight *= if wall { 0.5 * grid.h[b] } else { grid.h[b] };
        }
        let v = grid.layout.vertex_index(&full);
        let rho: f64 = (0..n)
            .filter(|&j| j != axis)
            .map(|j| cp[j][v] * curl(&ca, v, j) - ca[j][v] * curl(&cp, v, j))
            .sum();
        density.push((v, rho));
        integral += weight * rho;
    }

    let field: Vec<f64> = dec.metric().vertex_coords().iter().map(|x| x[axis]).collect();
    let sigma = Hypersurface::cut_from_level(dec.complex(), &field, position)?;
    let pairing = flux_pairing(dec, &sigma, &a, phi)? - flux_pairing(dec, &sigma, phi, &a)?;
    Ok(CoordinateCurrent { axis, position, density, integral, pairing, discrepancy: (integral - pairing).abs() })
}

/// η-dependence of f^{φ̃}_Σ over a family of solutions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CommutatorReport {
    pub values: Vec<f64>,
    /// max − min of `values`.
    pub spread: f64,
    /// max |value|, for scale.
    pub scale: f64,
}

/// φ̃^j = Σ_i (φ1^i ∂_i φ2^j − φ2^i ∂_i φ1^j) by finite differences, returned as
/// edge integrals (trapezoid), with the spread of f^{φ̃}_Σ over `solutions`.
pub fn commutator_field(
    dec: &Dec,
    phi1: &Cochain,
    phi2: &Cochain,
    sigma: &Hypersurface,
    solutions: &[Connection],
) -> Result<(Cochain, CommutatorReport)> {
    let grid = Grid::of(dec)?;
    let n = grid.dim();
    phi1.check(dec.complex(), 1)?;
    phi2.check(dec.complex(), 1)?;
    let c1 = grid.components(dec, phi1);
    let c2 = grid.components(dec, phi2);
    let nv = dec.complex().num_vertices();
    let field: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            (0..nv)
                .map(|v| {
                    (0..n)
                        .map(|i| c1[i][v] * grid.diff(&c2[j], v, i) - c2[i][v] * grid.diff(&c1[j], v, i))
                        .sum()
                })
                .collect()
        })
        .collect();

    let c = dec.complex();
    let values = (0..c.count(1))
        .map(|e| {
            let s = c.simplex(1, e);
            let cell = c.cells_containing(1, e)[0];
            let pts = dec.metric().points_in_cell(c, cell, s);
            (0..n).map(|j| 0.5 * (field[j][s[0]] + field[j][s[1]]) * (pts[1][j] - pts[0][j])).sum()
        })
        .collect();
    let tilde = Cochain::from_values(c, 1, values)?;

    let values: Vec<f64> = solutions
        .iter()
        .map(|eta| helicity_observable(dec, &tilde, sigma, eta))
        .collect::<Result<_>>()?;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if values.is_empty() { 0.0 } else { max - min };
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok((tilde, CommutatorReport { values, spread, scale }))
}
