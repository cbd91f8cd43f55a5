use serde::{Deserialize, Serialize};

use super::complex::SimplicialComplex;
use super::metric::MetricData;
use crate::error::{Error, Result};

/// Mesh file format: `{"dimension": n, "vertices": [[x, ...], ...], "cells": [[v0, ...], ...]}`.
///
/// Lower simplices and boundary flags are derived on load. When the embedding
/// dimension equals `n`, cell orientation follows the sign of the coordinate
/// determinant; otherwise the listed vertex order is used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshJson {
    pub dimension: usize,
    pub vertices: Vec<Vec<f64>>,
    pub cells: Vec<Vec<usize>>,
}

impl MeshJson {
    pub fn from_mesh(complex: &SimplicialComplex, metric: &MetricData) -> Self {
        let n = complex.dim();
        let cells = complex
            .simplices(n)
            .iter()
            .enumerate()
            .map(|(c, s)| {
                let mut s = s.clone();
                if complex.orientation(c) < 0 {
                    s.swap(0, 1);
                }
                s
            })
            .collect();
        Self { dimension: n, vertices: metric.vertex_coords().to_vec(), cells }
    }

    pub fn to_mesh(&self) -> Result<(SimplicialComplex, MetricData)> {
        let n = self.dimension;
        let mut cells = self.cells.clone();
        if self.vertices.iter().all(|v| v.len() == n) {
            for cell in &mut cells {
                if cell.len() != n + 1 || cell.iter().any(|&v| v >= self.vertices.len()) {
                    return Err(Error::InvalidMesh(format!("bad cell {cell:?}")));
                }
                let m = nalgebra::DMatrix::from_fn(n, n, |i, j| {
                    self.vertices[cell[i + 1]][j] - self.vertices[cell[0]][j]
                });
                if m.determinant() < 0.0 {
                    cell.swap(0, 1);
                }
            }
        }
        let complex = SimplicialComplex::from_cells(n, self.vertices.len(), &cells)?;
        let metric = MetricData::from_coordinates(&complex, self.vertices.clone())?;
        Ok((complex, metric))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_box;

    #[test]
    fn box_round_trip() {
        let (c, m) = build_box(3, &[2, 1, 1], &[2.0, 1.0, 1.0]).unwrap();
        let json = MeshJson::from_mesh(&c, &m).to_json().unwrap();
        let (c2, m2) = MeshJson::from_json(&json).unwrap().to_mesh().unwrap();
        assert_eq!(c.simplices(3), c2.simplices(3));
        assert_eq!(c.orientations(), c2.orientations());
        assert_eq!(c.f_vector(), c2.f_vector());
        assert!((m.total_volume(&c) - m2.total_volume(&c2)).abs() < 1e-14);
    }

    #[test]
    fn parses_literal() {
        let s = r#"{"dimension": 2, "vertices": [[0,0],[1,0],[0,1]], "cells": [[0,2,1]]}"#;
        let (c, _) = MeshJson::from_json(s).unwrap().to_mesh().unwrap();
        // clockwise listing is reoriented by the determinant
        assert_eq!(c.orientation(0), 1);
    }
}
