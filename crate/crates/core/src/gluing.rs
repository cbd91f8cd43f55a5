//! Gluing regions along isometric boundary pieces: quotient complexes, glued
//! solutions, splitting along a cut and the moduli-dimension check.

use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dec::{Cochain, Dec};
use crate::error::{Error, Result};
use crate::geometry::{betti_numbers, MetricData, SimplicialComplex};
use crate::linalg;
use crate::solver::{numerical_rank, SolverConfig};
use crate::ym::{harmonic_basis, is_solution, Connection, Flavor};

/// Identification of Σ₂ ⊆ ∂U₂ with Σ₁ ⊆ ∂U₁.
///
/// `sigma1`, `sigma2` are (n−1)-simplex indices; `vertex_map` pairs a vertex of
/// U₁ with the vertex of U₂ glued to it. For self-gluing both sides refer to the
/// same complex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GluingMap {
    pub sigma1: Vec<usize>,
    pub sigma2: Vec<usize>,
    pub vertex_map: Vec<(usize, usize)>,
}

impl GluingMap {
    /// Match boundary vertices of U₂ moved by `transform` with boundary vertices of
    /// U₁ (within `tol`); Σ₂ is every boundary face of U₂ whose image is a
    /// boundary face of U₁.
    pub fn by_coordinates(
        u1: (&SimplicialComplex, &MetricData),
        u2: (&SimplicialComplex, &MetricData),
        transform: impl Fn(&[f64]) -> Vec<f64>,
        tol: f64,
    ) -> Result<Self> {
        let (c1, m1) = u1;
        let (c2, m2) = u2;
        let n = c1.dim();
        if c2.dim() != n {
            return Err(Error::WrongDimension { expected: n, found: c2.dim() });
        }
        let b1 = c1.boundary_flags(0);
        let mut vmap: HashMap<usize, usize> = HashMap::new();
        for b in c2.boundary_indices(0) {
            let y = transform(&m2.vertex_coords()[b]);
            let hit = (0..c1.num_vertices()).find(|&a| {
                b1[a] && m1.vertex_coords()[a].iter().zip(&y).all(|(p, q)| (p - q).abs() <= tol)
            });
            if let Some(a) = hit {
                vmap.insert(b, a);
            }
        }
        let mut sigma1 = Vec::new();
        let mut sigma2 = Vec::new();
        for f in c2.boundary_indices(n - 1) {
            let verts = c2.simplex(n - 1, f);
            let Some(image) = verts.iter().map(|v| vmap.get(v).copied()).collect::<Option<Vec<_>>>() else {
                continue;
            };
            if let Some(g) = c1.find(&image).filter(|&g| c1.is_boundary(n - 1, g)) {
                sigma1.push(g);
                sigma2.push(f);
            }
        }
        if sigma2.is_empty() {
            return Err(Error::Gluing("no matching boundary faces".into()));
        }
        let used: Vec<usize> = sigma2.iter().flat_map(|&f| c2.simplex(n - 1, f).to_vec()).sorted().dedup().collect();
        let vertex_map = used.into_iter().map(|b| (vmap[&b], b)).collect();
        Ok(Self { sigma1, sigma2, vertex_map })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Check the map against the two complexes; returns the isometry residual
    /// (max edge-length difference).
    pub fn validate(&self, u1: (&SimplicialComplex, &MetricData), u2: (&SimplicialComplex, &MetricData), tol: f64) -> Result<f64> {
        let (c1, m1) = u1;
        let (c2, m2) = u2;
        let n = c1.dim();
        if c2.dim() != n || self.sigma1.len() != self.sigma2.len() || self.sigma1.is_empty() {
            return Err(Error::Gluing("Σ₁ and Σ₂ must be nonempty and of equal size".into()));
        }
        let to1: HashMap<usize, usize> = self.vertex_map.iter().map(|&(a, b)| (b, a)).collect();
        if to1.len() != self.vertex_map.len() || self.vertex_map.iter().map(|p| p.0).unique().count() != to1.len() {
            return Err(Error::Gluing("vertex map is not a bijection".into()));
        }
        for (&f1, &f2) in self.sigma1.iter().zip(&self.sigma2) {
            if f1 >= c1.count(n - 1) || f2 >= c2.count(n - 1) {
                return Err(Error::Gluing(format!("face index out of range ({f1}, {f2})")));
            }
            if !c1.is_boundary(n - 1, f1) || !c2.is_boundary(n - 1, f2) {
                return Err(Error::Gluing("interface faces must lie in the boundary".into()));
            }
            let image: Option<Vec<usize>> = c2.simplex(n - 1, f2).iter().map(|v| to1.get(v).copied()).collect();
            if image.and_then(|i| c1.find(&i)) != Some(f1) {
                return Err(Error::Gluing(format!("face {f2} does not map onto face {f1}")));
            }
        }
        let mut worst = 0.0f64;
        for (e2, s) in c2.simplices(1).iter().enumerate() {
            let (Some(&a), Some(&b)) = (to1.get(&s[0]), to1.get(&s[1])) else { continue };
            let Some(e1) = c1.find(&[a, b]) else { continue };
            worst = worst.max((m1.volume(1, e1) - m2.volume(1, e2)).abs());
        }
        if worst > tol {
            return Err(Error::Gluing(format!("isometry violated by {worst:e}")));
        }
        Ok(worst)
    }
}

/// Result of a gluing: the quotient and where each piece's vertices went.
#[derive(Clone, Debug)]
pub struct Glued {
    pub complex: SimplicialComplex,
    pub metric: MetricData,
    /// Glued vertex of each vertex of U₁.
    pub from_first: Vec<usize>,
    /// Glued vertex of each vertex of U₂ (equals `from_first` for self-gluing).
    pub from_second: Vec<usize>,
}

impl Glued {
    pub fn dec(&self) -> Dec {
        Dec::new(self.complex.clone(), self.metric.clone())
    }
}

const ISOMETRY_TOL: f64 = 1e-9;

/// Glue U₂ to U₁ along the map.
pub fn glue(u1: (&SimplicialComplex, &MetricData), u2: (&SimplicialComplex, &MetricData), map: &GluingMap) -> Result<Glued> {
    map.validate(u1, u2, ISOMETRY_TOL)?;
    quotient(&[u1, u2], map, 1)
}

/// Glue Σ₂ ⊆ ∂U onto Σ₁ ⊆ ∂U.
pub fn glue_self(u: (&SimplicialComplex, &MetricData), map: &GluingMap) -> Result<Glued> {
    map.validate(u, u, ISOMETRY_TOL)?;
    if map.sigma1.iter().any(|f| map.sigma2.contains(f)) {
        return Err(Error::Gluing("Σ₁ and Σ₂ overlap".into()));
    }
    quotient(&[u], map, 0)
}

fn quotient(parts: &[(&SimplicialComplex, &MetricData)], map: &GluingMap, second: usize) -> Result<Glued> {
    let n = parts[0].0.dim();
    let offsets: Vec<usize> = parts.iter().scan(0, |acc, p| {
        let o = *acc;
        *acc += p.0.num_vertices();
        Some(o)
    }).collect();
    let total: usize = parts.iter().map(|p| p.0.num_vertices()).sum();
    let mut parent: Vec<usize> = (0..total).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(a, b) in &map.vertex_map {
        let (ra, rb) = (root(&mut parent, offsets[0] + a), root(&mut parent, offsets[second] + b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut label = vec![usize::MAX; total];
    let mut next = 0;
    let mut coords = Vec::new();
    for x in 0..total {
        let r = root(&mut parent, x);
        if label[r] == usize::MAX {
            label[r] = next;
            next += 1;
            let (p, v) = locate(&offsets, x);
            coords.push(parts[p].1.vertex_coords()[v].clone());
        }
        label[x] = label[r];
    }

    let mut cells = Vec::new();
    let mut frames_by_key: HashMap<Vec<usize>, Vec<(usize, Vec<f64>)>> = HashMap::new();
    for (p, (c, m)) in parts.iter().enumerate() {
        for i in 0..c.count(n) {
            let s = c.simplex(n, i);
            let mut cell: Vec<usize> = s.iter().map(|&v| label[offsets[p] + v]).collect();
            let pts: Vec<(usize, Vec<f64>)> = cell.iter().copied().zip(m.cell_frame(i).iter().cloned()).collect();
            if c.orientation(i) < 0 {
                cell.swap(0, 1);
            }
            let key: Vec<usize> = cell.iter().copied().sorted().collect();
            if key.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Gluing(format!("cell {s:?} collapses under the identification")));
            }
            if frames_by_key.insert(key, pts).is_some() {
                return Err(Error::Gluing("two cells are identified".into()));
            }
            cells.push(cell);
        }
    }
    let complex = SimplicialComplex::from_cells(n, next, &cells).map_err(|e| Error::Gluing(e.to_string()))?;

    // every identification must be accounted for by Σ
    let sigma_faces: Vec<&[usize]> = map.sigma2.iter().map(|&f| parts[second].0.simplex(n - 1, f)).collect();
    for k in 0..n {
        let shared = sigma_faces.iter().flat_map(|f| f.iter().copied().combinations(k + 1)).unique().count();
        let expected: usize = parts.iter().map(|p| p.0.count(k)).sum::<usize>() - shared;
        if complex.count(k) != expected {
            return Err(Error::Gluing(format!(
                "identification is not simplicial: {} {k}-simplices, expected {expected}",
                complex.count(k)
            )));
        }
    }
    for (&f1, _) in map.sigma1.iter().zip(&map.sigma2) {
        let image: Vec<usize> = parts[0].0.simplex(n - 1, f1).iter().map(|&v| label[offsets[0] + v]).collect();
        let g = complex.find(&image).expect("interface face");
        if complex.cofaces(n - 1, g).len() != 2 {
            return Err(Error::Gluing("interface face is not shared by two cells".into()));
        }
    }
    if !complex.is_coherently_oriented() {
        return Err(Error::Gluing("orientation mismatch across the interface".into()));
    }

    let frames = complex
        .simplices(n)
        .iter()
        .map(|s| {
            let pts = &frames_by_key[s];
            s.iter().map(|v| pts.iter().find(|p| p.0 == *v).expect("vertex").1.clone()).collect()
        })
        .collect();
    let metric = MetricData::from_frames(&complex, coords, frames)?;
    let from_first = (0..parts[0].0.num_vertices()).map(|v| label[offsets[0] + v]).collect();
    let from_second = (0..parts[second].0.num_vertices()).map(|v| label[offsets[second] + v]).collect();
    Ok(Glued { complex, metric, from_first, from_second })
}

fn locate(offsets: &[usize], x: usize) -> (usize, usize) {
    let p = offsets.iter().rposition(|&o| o <= x).expect("offset");
    (p, x - offsets[p])
}

/// Per-edge mismatch across the interface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterfaceMismatch {
    /// Edge vertices in the glued complex.
    pub edge: [usize; 2],
    pub dirichlet: f64,
    /// None for interface edges on the glued boundary.
    pub neumann: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub max_dirichlet: f64,
    pub max_neumann: f64,
    pub tolerance: f64,
    /// Entries above tolerance.
    pub mismatches: Vec<InterfaceMismatch>,
    /// max interior |Kη| on the glued complex (when gluing succeeded).
    pub glued_residual: Option<f64>,
}

impl fmt::Display for TraceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Dirichlet {:.3e}, Neumann {:.3e} (tolerance {:.1e}), {} edges above tolerance",
            self.max_dirichlet,
            self.max_neumann,
            self.tolerance,
            self.mismatches.len()
        )
    }
}

/// Interface edge pairs: (glued edge, edge in U₁, sign in U₁, edge in U₂, sign in U₂);
/// the signs convert piece orientation to glued orientation.
fn interface_edges(
    c1: &SimplicialComplex,
    c2: &SimplicialComplex,
    map: &GluingMap,
    glued: &Glued,
) -> Vec<(usize, usize, f64, usize, f64)> {
    let n = c1.dim();
    let to1: HashMap<usize, usize> = map.vertex_map.iter().map(|&(a, b)| (b, a)).collect();
    let edges2: Vec<usize> = map
        .sigma2
        .iter()
        .flat_map(|&f| c2.simplex(n - 1, f).iter().copied().combinations(2).map(|e| c2.find(&e).expect("edge")))
        .sorted()
        .dedup()
        .collect();
    let sign = |a: usize, b: usize| if a < b { 1.0 } else { -1.0 };
    edges2
        .into_iter()
        .map(|e2| {
            let s = c2.simplex(1, e2);
            let (a, b) = (to1[&s[0]], to1[&s[1]]);
            let e1 = c1.find(&[a, b]).expect("mapped edge");
            let s1 = c1.simplex(1, e1);
            let (g0, g1) = (glued.from_second[s[0]], glued.from_second[s[1]]);
            let g = glued.complex.find(&[g0, g1]).expect("glued edge");
            let t1 = sign(glued.from_first[s1[0]], glued.from_first[s1[1]]);
            (g, e1, t1, e2, sign(g0, g1))
        })
        .collect()
}

/// Compare tangential and normal traces of η₁, η₂ on the interface.
pub fn trace_report(dec1: &Dec, eta1: &Cochain, dec2: &Dec, eta2: &Cochain, map: &GluingMap, glued: &Glued, tol: f64) -> Result<TraceReport> {
    eta1.check(dec1.complex(), 1)?;
    eta2.check(dec2.complex(), 1)?;
    let k1 = dec1.apply_stiffness(eta1)?;
    let k2 = dec2.apply_stiffness(eta2)?;
    let scale = 1.0 + eta1.norm_inf().max(eta2.norm_inf());
    let mut report =
        TraceReport { max_dirichlet: 0.0, max_neumann: 0.0, tolerance: tol, mismatches: Vec::new(), glued_residual: None };
    for (g, e1, s1, e2, s2) in interface_edges(dec1.complex(), dec2.complex(), map, glued) {
        let dirichlet = (s1 * eta1.values[e1] - s2 * eta2.values[e2]).abs();
        let neumann = (!glued.complex.is_boundary(1, g)).then(|| (s1 * k1.values[e1] + s2 * k2.values[e2]).abs());
        report.max_dirichlet = report.max_dirichlet.max(dirichlet);
        report.max_neumann = report.max_neumann.max(neumann.unwrap_or(0.0));
        if dirichlet > tol * scale || neumann.is_some_and(|x| x > tol * scale) {
            let s = glued.complex.simplex(1, g);
            report.mismatches.push(InterfaceMismatch { edge: [s[0], s[1]], dirichlet, neumann });
        }
    }
    Ok(report)
}

/// Concatenate η₁ and η₂ into a connection on the glued region.
///
/// Interface edges take the value from U₁. Fails with the per-edge report when
/// either trace disagrees beyond `tol` (relative to 1 + max|η|).
pub fn glue_solutions(
    dec1: &Dec,
    eta1: &Cochain,
    dec2: &Dec,
    eta2: &Cochain,
    map: &GluingMap,
    glued: &Glued,
    glued_dec: &Dec,
    tol: f64,
) -> Result<(Connection, TraceReport)> {
    if glued_dec.complex().fingerprint() != glued.complex.fingerprint() {
        return Err(Error::ComplexMismatch);
    }
    let mut report = trace_report(dec1, eta1, dec2, eta2, map, glued, tol)?;
    if !report.mismatches.is_empty() {
        return Err(Error::TraceMismatch(report.to_string()));
    }
    let gc = &glued.complex;
    let mut values = vec![f64::NAN; gc.count(1)];
    for (piece, eta, labels) in [(dec2, eta2, &glued.from_second), (dec1, eta1, &glued.from_first)] {
        for (e, s) in piece.complex().simplices(1).iter().enumerate() {
            let (a, b) = (labels[s[0]], labels[s[1]]);
            let g = gc.find(&[a, b]).expect("glued edge");
            values[g] = if a < b { eta.values[e] } else { -eta.values[e] };
        }
    }
    let phi = Cochain::from_values(gc, 1, values)?;
    let eta = Connection::from_phi(phi);
    let (_, residual) = is_solution(glued_dec, &eta, tol)?;
    report.glued_residual = Some(residual);
    Ok((eta, report))
}

/// A region split along a bipartition of its cells.
#[derive(Clone, Debug)]
pub struct Split {
    pub lower: (SimplicialComplex, MetricData),
    pub upper: (SimplicialComplex, MetricData),
    /// Original vertex of each vertex of the lower / upper piece.
    pub lower_vertices: Vec<usize>,
    pub upper_vertices: Vec<usize>,
    /// Map gluing the upper piece back onto the lower one.
    pub map: GluingMap,
}

/// Split U into the cells with `minus[c]` (lower) and the rest (upper).
pub fn split(complex: &SimplicialComplex, metric: &MetricData, minus: &[bool]) -> Result<Split> {
    let n = complex.dim();
    if minus.len() != complex.count(n) {
        return Err(Error::LengthMismatch { expected: complex.count(n), found: minus.len() });
    }
    let piece = |side: bool| -> Result<((SimplicialComplex, MetricData), Vec<usize>)> {
        let cells: Vec<usize> = (0..complex.count(n)).filter(|&c| minus[c] == side).collect();
        if cells.is_empty() {
            return Err(Error::Gluing("empty side".into()));
        }
        let verts: Vec<usize> = cells.iter().flat_map(|&c| complex.simplex(n, c).to_vec()).sorted().dedup().collect();
        let local: HashMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let oriented: Vec<Vec<usize>> = cells
            .iter()
            .map(|&c| {
                let mut s: Vec<usize> = complex.simplex(n, c).iter().map(|v| local[v]).collect();
                if complex.orientation(c) < 0 {
                    s.swap(0, 1);
                }
                s
            })
            .collect();
        let pc = SimplicialComplex::from_cells(n, verts.len(), &oriented)?;
        // relabelling is monotone, so frames keep their sorted order
        let frames = pc
            .simplices(n)
            .iter()
            .map(|s| {
                let orig: Vec<usize> = s.iter().map(|&v| verts[v]).collect();
                metric.cell_frame(complex.find(&orig).expect("cell")).to_vec()
            })
            .collect();
        let coords = verts.iter().map(|&v| metric.vertex_coords()[v].clone()).collect();
        let pm = MetricData::from_frames(&pc, coords, frames)?;
        Ok(((pc, pm), verts))
    };
    let (lower, lower_vertices) = piece(true)?;
    let (upper, upper_vertices) = piece(false)?;
    let lo: HashMap<usize, usize> = lower_vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let up: HashMap<usize, usize> = upper_vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    let mut sigma1 = Vec::new();
    let mut sigma2 = Vec::new();
    let mut shared = Vec::new();
    for f in 0..complex.count(n - 1) {
        let cof = complex.cofaces(n - 1, f);
        if cof.len() == 2 && minus[cof[0]] != minus[cof[1]] {
            let s = complex.simplex(n - 1, f);
            let l: Vec<usize> = s.iter().map(|v| lo[v]).collect();
            let u: Vec<usize> = s.iter().map(|v| up[v]).collect();
            sigma1.push(lower.0.find(&l).expect("face"));
            sigma2.push(upper.0.find(&u).expect("face"));
            shared.extend_from_slice(s);
        }
    }
    let shared: Vec<usize> = shared.into_iter().sorted().dedup().collect();
    let touching = lower_vertices.iter().filter(|v| up.contains_key(v)).count();
    if touching != shared.len() {
        return Err(Error::Gluing("the two sides also touch outside the interface".into()));
    }
    let vertex_map = shared.iter().map(|v| (lo[v], up[v])).collect();
    Ok(Split { lower, upper, lower_vertices, upper_vertices, map: GluingMap { sigma1, sigma2, vertex_map } })
}

/// Restrict a cochain on U to a piece with the given original-vertex table.
pub fn restrict(complex: &SimplicialComplex, x: &Cochain, piece: &SimplicialComplex, vertices: &[usize]) -> Result<Cochain> {
    x.check(complex, x.degree)?;
    let values = piece
        .simplices(x.degree)
        .iter()
        .map(|s| {
            let orig: Vec<usize> = s.iter().map(|&v| vertices[v]).collect();
            x.values[complex.find(&orig).expect("simplex of the piece")]
        })
        .collect();
    Cochain::from_values(piece, x.degree, values)
}

/// Vertex relabelling by lexicographic coordinates, and the sorted cell list in
/// those labels. Equal forms mean equal complexes up to relabelling.
pub fn canonical_form(complex: &SimplicialComplex, metric: &MetricData) -> Vec<Vec<usize>> {
    let key = |v: usize| -> Vec<i64> { metric.vertex_coords()[v].iter().map(|x| (x * 1e8).round() as i64).collect() };
    let order: Vec<usize> = (0..complex.num_vertices()).sorted_by_key(|&v| key(v)).collect();
    let mut rank = vec![0; order.len()];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    let n = complex.dim();
    complex
        .simplices(n)
        .iter()
        .map(|s| s.iter().map(|&v| rank[v]).sorted().collect())
        .sorted()
        .collect()
}

/// Dimensions of solutions modulo gauge, computed on the pieces with interface
/// matching and directly on the glued region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GluingDimensionReport {
    /// dim {(v₁, v₂) solving on each piece, matching in trace and Neumann trace}.
    pub pieces_solutions: usize,
    /// Interior gauge on each piece plus interface gauge.
    pub pieces_gauge: usize,
    pub pieces_dim: usize,
    pub glued_solutions: usize,
    pub glued_gauge: usize,
    pub glued_dim: usize,
    pub boundary_edges: usize,
    pub relative_b1: usize,
    pub betti1: usize,
    pub h1_neumann_dim: usize,
    pub equal: bool,
}

/// The moduli-dimension statement for U = U₁ ∪_Σ U₂ (pass `None` for U₂ to
/// check a self-gluing of U₁).
pub fn gluing_dimension_check(
    dec1: &Dec,
    dec2: Option<&Dec>,
    map: &GluingMap,
    glued: &Glued,
    cfg: &SolverConfig,
) -> Result<GluingDimensionReport> {
    let parts: Vec<&Dec> = match dec2 {
        Some(d) => vec![dec1, d],
        None => vec![dec1],
    };
    let second = parts.len() - 1;
    let offsets: Vec<usize> = parts.iter().scan(0, |acc, d| {
        let o = *acc;
        *acc += d.complex().count(1);
        Some(o)
    }).collect();
    let cols: usize = parts.iter().map(|d| d.complex().count(1)).sum();

    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    for (p, d) in parts.iter().enumerate() {
        let k = d.stiffness();
        for e in d.complex().interior_indices(1) {
            let row = k.row(e);
            rows.push(row.col_indices().iter().zip(row.values()).map(|(&j, &v)| (offsets[p] + j, v)).collect());
        }
    }
    let c2 = parts[second].complex();
    for (g, e1, s1, e2, s2) in interface_edges(dec1.complex(), c2, map, glued) {
        rows.push(vec![(offsets[0] + e1, s1), (offsets[second] + e2, -s2)]);
        if !glued.complex.is_boundary(1, g) {
            let mut row: Vec<(usize, f64)> = Vec::new();
            for (p, e, s) in [(0, e1, s1), (second, e2, s2)] {
                let r = parts[p].stiffness().row(e);
                row.extend(r.col_indices().iter().zip(r.values()).map(|(&j, &v)| (offsets[p] + j, s * v)));
            }
            rows.push(row);
        }
    }
    let constraint = dense_rows(&rows, cols);
    let pieces_solutions = cols - numerical_rank(&constraint, cfg)?;

    // gauge: one generator per interior vertex of the glued region, acting on
    // every preimage
    let gc = &glued.complex;
    let mut preimages: Vec<Vec<(usize, usize)>> = vec![Vec::new(); gc.num_vertices()];
    for (v, &g) in glued.from_first.iter().enumerate() {
        preimages[g].push((0, v));
    }
    if second == 1 {
        for (v, &g) in glued.from_second.iter().enumerate() {
            preimages[g].push((1, v));
        }
    }
    let interior: Vec<usize> = gc.interior_indices(0);
    let mut gauge = DMatrix::zeros(cols, interior.len());
    for (j, &g) in interior.iter().enumerate() {
        for &(p, v) in &preimages[g] {
            let d0 = parts[p].d_matrix(0);
            let col = linalg::spmv(d0, &unit(parts[p].complex().num_vertices(), v));
            for (e, x) in col.iter().enumerate() {
                gauge[(offsets[p] + e, j)] += x;
            }
        }
    }
    let pieces_gauge = numerical_rank(&gauge, cfg)?;

    let gd = glued.dec();
    let k = gd.stiffness();
    let krows: Vec<Vec<(usize, f64)>> = gc
        .interior_indices(1)
        .iter()
        .map(|&e| {
            let r = k.row(e);
            r.col_indices().iter().copied().zip(r.values().iter().copied()).collect()
        })
        .collect();
    let glued_solutions = gc.count(1) - numerical_rank(&dense_rows(&krows, gc.count(1)), cfg)?;
    let d0 = linalg::to_dense(&linalg::submatrix(gd.d_matrix(0), &(0..gc.count(1)).collect::<Vec<_>>(), &interior));
    let glued_gauge = numerical_rank(&d0, cfg)?;

    let pieces_dim = pieces_solutions - pieces_gauge;
    let glued_dim = glued_solutions - glued_gauge;
    Ok(GluingDimensionReport {
        pieces_solutions,
        pieces_gauge,
        pieces_dim,
        glued_solutions,
        glued_gauge,
        glued_dim,
        boundary_edges: gc.boundary_indices(1).len(),
        relative_b1: betti_numbers(gc, true)[1],
        betti1: betti_numbers(gc, false)[1],
        h1_neumann_dim: harmonic_basis(&gd, Flavor::Neumann, cfg)?.len(),
        equal: pieces_dim == glued_dim,
    })
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut u = vec![0.0; n];
    u[i] = 1.0;
    u
}

/// Dense matrix from sparse rows, each scaled to unit length.
fn dense_rows(rows: &[Vec<(usize, f64)>], cols: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows.len(), cols);
    for (i, row) in rows.iter().enumerate() {
        let norm = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        for &(j, v) in row {
            m[(i, j)] += v / norm;
        }
    }
    m
}
