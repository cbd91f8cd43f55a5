use std::collections::{HashMap, HashSet};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{is_relatively_null, Chain, MetricData, SimplicialComplex};

/// An edge touched by Σ, with the cells around it split by local side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedEdge {
    pub edge: usize,
    /// Whether the edge belongs to E⁻ (tie rule: its lowest-index coface is on the minus side).
    pub in_minus: bool,
    pub minus_cells: Vec<usize>,
    pub plus_cells: Vec<usize>,
}

/// Admissible cut: a relative (n−1)-cycle of interior faces, oriented so that
/// it is the boundary of its minus side.
///
/// Cuts built from a cell bipartition are null-homologous relative to ∂U;
/// level-set and angle cuts may carry a nontrivial relative class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypersurface {
    faces: Vec<(usize, i8)>,
    minus_cells: Option<Vec<bool>>,
    mixed: Vec<MixedEdge>,
    fingerprint: u64,
}

impl Hypersurface {
    /// Cut between S⁻ (`minus[c]` true) and S⁺; faces are oriented as ∂S⁻.
    pub fn from_bipartition(complex: &SimplicialComplex, minus: Vec<bool>) -> Result<Self> {
        let n = complex.dim();
        if minus.len() != complex.count(n) {
            return Err(Error::LengthMismatch { expected: complex.count(n), found: minus.len() });
        }
        if minus.iter().all(|&m| m) || minus.iter().all(|&m| !m) {
            return Err(Error::InvalidHypersurface("one side of the bipartition is empty".into()));
        }
        let mut faces = Vec::new();
        for f in 0..complex.count(n - 1) {
            let cof = complex.cofaces(n - 1, f);
            if cof.len() == 2 && minus[cof[0]] != minus[cof[1]] {
                let c = if minus[cof[0]] { cof[0] } else { cof[1] };
                faces.push((f, incidence(complex, c, f)));
            }
        }
        let mut s = Self::from_faces(complex, faces)?;
        s.minus_cells = Some(minus);
        Ok(s)
    }

    /// S⁻ = cells whose barycentric average of `field` is below `level`; cells
    /// whose average equals the level go to S⁺.
    pub fn cut_from_level(complex: &SimplicialComplex, field: &[f64], level: f64) -> Result<Self> {
        let n = complex.dim();
        if field.len() != complex.num_vertices() {
            return Err(Error::LengthMismatch { expected: complex.num_vertices(), found: field.len() });
        }
        let mut minus = Vec::with_capacity(complex.count(n));
        for c in 0..complex.count(n) {
            let s = complex.simplex(n, c);
            let avg = s.iter().map(|&v| field[v]).sum::<f64>() / s.len() as f64;
            minus.push(avg < level - 1e-12);
        }
        Self::from_bipartition(complex, minus)
    }

    /// Σ made of the interior faces whose vertices all satisfy |field − level| ≤ tol;
    /// the minus side is where the field is below the level.
    pub fn from_level_set(complex: &SimplicialComplex, field: &[f64], level: f64, tol: f64) -> Result<Self> {
        let n = complex.dim();
        let on = |v: usize| (field[v] - level).abs() <= tol;
        let mut faces = Vec::new();
        for f in 0..complex.count(n - 1) {
            if complex.is_boundary(n - 1, f) || !complex.simplex(n - 1, f).iter().all(|&v| on(v)) {
                continue;
            }
            let cof = complex.cofaces(n - 1, f);
            let below = |c: usize| {
                let s = complex.simplex(n, c);
                (s.iter().map(|&v| field[v]).sum::<f64>() / s.len() as f64) < level
            };
            let (b0, b1) = (below(cof[0]), below(cof[1]));
            if b0 == b1 {
                return Err(Error::InvalidHypersurface(format!("face {f} does not separate the level set")));
            }
            let c = if b0 { cof[0] } else { cof[1] };
            faces.push((f, incidence(complex, c, f)));
        }
        if faces.is_empty() {
            return Err(Error::InvalidHypersurface(format!("no interior faces on level {level}")));
        }
        Self::from_faces(complex, faces)
    }

    /// Half-plane cut {angle(x, y) = θ} around the z-axis (annulus and solid
    /// torus), minus side at smaller angles.
    pub fn angle_cut(complex: &SimplicialComplex, metric: &MetricData, theta: f64) -> Result<Self> {
        let field: Vec<f64> = metric
            .vertex_coords()
            .iter()
            .map(|x| {
                let mut a = x[1].atan2(x[0]) - theta;
                while a > std::f64::consts::PI {
                    a -= 2.0 * std::f64::consts::PI;
                }
                while a <= -std::f64::consts::PI {
                    a += 2.0 * std::f64::consts::PI;
                }
                a
            })
            .collect();
        Self::from_level_set(complex, &field, 0.0, 1e-9)
    }

    /// General constructor from signed (n−1)-faces.
    pub fn from_faces(complex: &SimplicialComplex, faces: Vec<(usize, i8)>) -> Result<Self> {
        let n = complex.dim();
        let mut faces = faces;
        faces.sort_unstable();
        faces.dedup();
        if faces.is_empty() {
            return Err(Error::InvalidHypersurface("empty hypersurface".into()));
        }
        let sign: HashMap<usize, i8> = faces.iter().copied().collect();
        if sign.len() != faces.len() {
            return Err(Error::InvalidHypersurface("face listed with both orientations".into()));
        }
        for &(f, s) in &faces {
            if f >= complex.count(n - 1) || s.abs() != 1 {
                return Err(Error::InvalidHypersurface(format!("bad face entry ({f}, {s})")));
            }
            if complex.is_boundary(n - 1, f) {
                return Err(Error::InvalidHypersurface(format!("face {f} lies in the boundary")));
            }
        }
        let chain = Chain { degree: n - 1, coeffs: signed_coeffs(complex, &faces) };
        let bd = chain.boundary(complex);
        if let Some(r) = bd.support().find(|&r| !complex.is_boundary(n - 2, r)) {
            return Err(Error::InvalidHypersurface(format!(
                "∂Σ meets the interior at {:?}",
                complex.simplex(n - 2, r)
            )));
        }

        let mut edges: Vec<usize> = faces
            .iter()
            .flat_map(|&(f, _)| {
                complex.simplex(n - 1, f).iter().copied().combinations(2).map(|e| complex.find(&e).expect("edge"))
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let mut mixed = Vec::with_capacity(edges.len());
        for e in edges {
            mixed.push(split_around_edge(complex, e, &sign)?);
        }
        Ok(Self { faces, minus_cells: None, mixed, fingerprint: complex.fingerprint() })
    }

    pub fn faces(&self) -> &[(usize, i8)] {
        &self.faces
    }

    pub fn mixed_edges(&self) -> &[MixedEdge] {
        &self.mixed
    }

    /// Cell bipartition, for cuts built from one.
    pub fn minus_cells(&self) -> Option<&[bool]> {
        self.minus_cells.as_deref()
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn chain(&self, complex: &SimplicialComplex) -> Chain {
        Chain { degree: complex.dim() - 1, coeffs: signed_coeffs(complex, &self.faces) }
    }

    /// Whether [Σ] = 0 in H_{n−1}(U, ∂U).
    pub fn is_relatively_null(&self, complex: &SimplicialComplex) -> bool {
        is_relatively_null(complex, &signed_coeffs(complex, &self.faces))
    }

    /// Whether Σ and Σ′ are homologous relative to ∂U.
    pub fn homologous_to(&self, other: &Self, complex: &SimplicialComplex) -> bool {
        let a = signed_coeffs(complex, &self.faces);
        let b = signed_coeffs(complex, &other.faces);
        let diff: Vec<i64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        is_relatively_null(complex, &diff)
    }

    /// Whether ∂Σ = ∅.
    pub fn is_closed(&self, complex: &SimplicialComplex) -> bool {
        self.chain(complex).boundary(complex).is_zero()
    }
}

fn signed_coeffs(complex: &SimplicialComplex, faces: &[(usize, i8)]) -> Vec<i64> {
    let mut coeffs = vec![0i64; complex.count(complex.dim() - 1)];
    for &(f, s) in faces {
        coeffs[f] = s as i64;
    }
    coeffs
}

/// Incidence [c : f] of an (n−1)-face in the oriented top cell c.
pub(crate) fn incidence(complex: &SimplicialComplex, c: usize, f: usize) -> i8 {
    complex
        .faces(complex.dim(), c)
        .iter()
        .find(|&&(g, _)| g == f)
        .map(|&(_, s)| s)
        .expect("face of cell")
}

/// Group the cells around `e` into components separated by Σ and assign each
/// component a side.
fn split_around_edge(complex: &SimplicialComplex, e: usize, sign: &HashMap<usize, i8>) -> Result<MixedEdge> {
    let n = complex.dim();
    let cells = complex.cells_containing(1, e).to_vec();
    let index: HashMap<usize, usize> = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let ev = complex.simplex(1, e);
    let mut parent: Vec<usize> = (0..cells.len()).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut side_hits: Vec<(usize, i8)> = Vec::new();
    let mut seen = HashSet::new();
    for &c in &cells {
        for &(f, inc) in complex.faces(n, c) {
            let fv = complex.simplex(n - 1, f);
            if !(fv.contains(&ev[0]) && fv.contains(&ev[1])) {
                continue;
            }
            if let Some(&s) = sign.get(&f) {
                side_hits.push((index[&c], inc * s));
            } else if seen.insert(f) {
                let cof = complex.cofaces(n - 1, f);
                if cof.len() == 2 {
                    let (a, b) = (root(&mut parent, index[&cof[0]]), root(&mut parent, index[&cof[1]]));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut comp_side: HashMap<usize, i8> = HashMap::new();
    for (i, s) in side_hits {
        let r = root(&mut parent, i);
        match comp_side.insert(r, s) {
            Some(prev) if prev != s => {
                return Err(Error::InvalidHypersurface(format!(
                    "inconsistent sides around edge {:?}",
                    complex.simplex(1, e)
                )))
            }
            _ => {}
        }
    }
    let mut minus_cells = Vec::new();
    let mut plus_cells = Vec::new();
    for (i, &c) in cells.iter().enumerate() {
        let r = root(&mut parent, i);
        match comp_side.get(&r) {
            Some(1) => minus_cells.push(c),
            Some(_) => plus_cells.push(c),
            None => {
                return Err(Error::InvalidHypersurface(format!(
                    "cells around edge {:?} not separated by Σ",
                    complex.simplex(1, e)
                )))
            }
        }
    }
    let lowest = *cells.iter().min().expect("edge has a coface");
    Ok(MixedEdge { edge: e, in_minus: minus_cells.contains(&lowest), minus_cells, plus_cells })
}
