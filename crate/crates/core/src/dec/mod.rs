//! Coboundary, Hodge stars, codifferential, inner products, cup product and the
//! Yang–Mills stiffness operator.

mod cochain;
mod whitney;

use itertools::Itertools;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use cochain::Cochain;
pub(crate) use whitney::local_faces;

use crate::error::{Error, Result};
use crate::geometry::{MetricData, SimplicialComplex};
use crate::linalg::{self, Csr};
use crate::solver::{solve_spsd, SolverConfig};

/// Which Hodge star to assemble.
///
/// `Whitney` uses the Galerkin mass of lowest-order Whitney forms for
/// 0 < k < n and the barycentric diagonal for k = 0 and k = n. `Barycentric` is
/// the diagonal star |⋆σ| / |σ| in every degree.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum StarKind {
    #[default]
    Whitney,
    Barycentric,
}

/// Symmetric positive-definite mass matrix on k-cochains.
#[derive(Clone, Debug)]
pub struct HodgeStar {
    degree: usize,
    matrix: Csr,
    diagonal: Option<Vec<f64>>,
}

impl HodgeStar {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn matrix(&self) -> &Csr {
        &self.matrix
    }

    /// Diagonal weights, when the star is diagonal.
    pub fn weights(&self) -> Option<&[f64]> {
        self.diagonal.as_deref()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match &self.diagonal {
            Some(d) => x.iter().zip(d).map(|(a, b)| a * b).collect(),
            None => linalg::spmv(&self.matrix, x),
        }
    }

    pub fn solve(&self, y: &[f64]) -> Result<Vec<f64>> {
        match &self.diagonal {
            Some(d) => Ok(y.iter().zip(d).map(|(a, b)| a / b).collect()),
            None => {
                let cfg = SolverConfig { tol: 1e-14, ..Default::default() };
                match solve_spsd(&self.matrix, y, &[], &cfg) {
                    Ok((x, _)) => Ok(x),
                    // the mass matrix is well conditioned; accept the best iterate near roundoff
                    Err(Error::NotConverged(r)) | Err(Error::Inconsistent(r)) if r.relative_residual < 1e-12 => {
                        Ok(solve_spsd(&self.matrix, y, &[], &SolverConfig { tol: 1e-12, ..cfg })?.0)
                    }
                    Err(e) => Err(e),
                }
            }
        }
    }
}

/// All operators of one mesh, assembled once.
#[derive(Clone, Debug)]
pub struct Dec {
    complex: SimplicialComplex,
    metric: MetricData,
    kind: StarKind,
    d: Vec<Csr>,
    stars: Vec<HodgeStar>,
    stiffness: Csr,
    cell_edges: Vec<Vec<usize>>,
    cell_stiffness: Vec<DMatrix<f64>>,
}

impl Dec {
    pub fn new(complex: SimplicialComplex, metric: MetricData) -> Self {
        Self::with_star(complex, metric, StarKind::Whitney)
    }

    pub fn with_star(complex: SimplicialComplex, metric: MetricData, kind: StarKind) -> Self {
        let n = complex.dim();
        let d: Vec<Csr> = (0..n)
            .map(|k| {
                let t: Vec<_> = (0..complex.count(k + 1))
                    .flat_map(|i| complex.faces(k + 1, i).iter().map(move |&(f, s)| (i, f, s as f64)))
                    .collect();
                linalg::csr_from_triplets(complex.count(k + 1), complex.count(k), &t)
            })
            .collect();

        let mut triplets: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n + 1];
        let mut cell_edges: Vec<Vec<usize>> = Vec::with_capacity(complex.count(n));
        let mut cell_stiffness = Vec::with_capacity(complex.count(n));
        for c in 0..complex.count(n) {
            let verts = complex.simplex(n, c).to_vec();
            let frame = metric.cell_frame(c);
            let mut local_m2 = None;
            for k in 0..=n {
                let faces = local_faces(n, k);
                let global: Vec<usize> = faces
                    .iter()
                    .map(|f| complex.find(&f.iter().map(|&p| verts[p]).collect_vec()).expect("face"))
                    .collect();
                let local = local_mass(&complex, &metric, kind, c, frame, &faces, &global, k);
                for (p, &gp) in global.iter().enumerate() {
                    for (q, &gq) in global.iter().enumerate() {
                        if local[(p, q)] != 0.0 {
                            triplets[k].push((gp, gq, local[(p, q)]));
                        }
                    }
                }
                if k == 2 {
                    local_m2 = Some(local);
                }
            }
            let edges = local_faces(n, 1);
            let tris = local_faces(n, 2);
            let mut dl = DMatrix::<f64>::zeros(tris.len(), edges.len());
            for (r, t) in tris.iter().enumerate() {
                for (i, skip) in (0..3).enumerate() {
                    let e: Vec<usize> = t.iter().enumerate().filter(|&(x, _)| x != skip).map(|(_, &v)| v).collect();
                    let col = edges.iter().position(|x| *x == e).expect("local edge");
                    dl[(r, col)] += if i % 2 == 0 { 1.0 } else { -1.0 };
                }
            }
            let m2 = local_m2.expect("n >= 2");
            let kc = dl.transpose() * m2 * &dl;
            cell_stiffness.push((&kc + kc.transpose()) * 0.5);
            cell_edges.push(
                edges
                    .iter()
                    .map(|e| complex.find(&[verts[e[0]], verts[e[1]]]).expect("edge"))
                    .collect(),
            );
        }
        let stars: Vec<HodgeStar> = triplets
            .iter()
            .enumerate()
            .map(|(k, t)| {
                let matrix = linalg::csr_from_triplets(complex.count(k), complex.count(k), t);
                let diagonal_kind = kind == StarKind::Barycentric || k == 0 || k == n;
                let diagonal = diagonal_kind.then(|| linalg::diag_of(&matrix));
                HodgeStar { degree: k, matrix, diagonal }
            })
            .collect();
        let mut st = Vec::new();
        for (c, edges) in cell_edges.iter().enumerate() {
            let kc: &DMatrix<f64> = &cell_stiffness[c];
            for (p, &gp) in edges.iter().enumerate() {
                for (q, &gq) in edges.iter().enumerate() {
                    st.push((gp, gq, kc[(p, q)]));
                }
            }
        }
        let stiffness = linalg::csr_from_triplets(complex.count(1), complex.count(1), &st);
        Self { complex, metric, kind, d, stars, stiffness, cell_edges, cell_stiffness }
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn metric(&self) -> &MetricData {
        &self.metric
    }

    pub fn dim(&self) -> usize {
        self.complex.dim()
    }

    pub fn star_kind(&self) -> StarKind {
        self.kind
    }

    pub fn star(&self, k: usize) -> &HodgeStar {
        &self.stars[k]
    }

    /// Matrix of d: C^k → C^{k+1}.
    pub fn d_matrix(&self, k: usize) -> &Csr {
        &self.d[k]
    }

    pub fn zeros(&self, k: usize) -> Cochain {
        Cochain::zeros(&self.complex, k)
    }

    pub(crate) fn cochain(&self, k: usize, values: Vec<f64>) -> Cochain {
        debug_assert_eq!(values.len(), self.complex.count(k));
        Cochain::raw(self.complex.fingerprint(), k, values)
    }

    pub fn d(&self, a: &Cochain) -> Result<Cochain> {
        if a.degree >= self.dim() {
            return Err(Error::DegreeMismatch { expected: self.dim() - 1, found: a.degree });
        }
        a.check(&self.complex, a.degree)?;
        Ok(self.cochain(a.degree + 1, linalg::spmv(&self.d[a.degree], &a.values)))
    }

    /// Codifferential ⋆_{k−1}⁻¹ dᵀ ⋆_k, the adjoint of d in the Hodge inner product.
    pub fn delta(&self, b: &Cochain) -> Result<Cochain> {
        if b.degree == 0 {
            return Err(Error::DegreeMismatch { expected: 1, found: 0 });
        }
        b.check(&self.complex, b.degree)?;
        let k = b.degree;
        let y = linalg::spmv_t(&self.d[k - 1], &self.stars[k].apply(&b.values));
        Ok(self.cochain(k - 1, self.stars[k - 1].solve(&y)?))
    }

    pub fn inner(&self, a: &Cochain, b: &Cochain) -> Result<f64> {
        a.check(&self.complex, a.degree)?;
        b.check(&self.complex, a.degree)?;
        Ok(linalg::dot(&a.values, &self.stars[a.degree].apply(&b.values)))
    }

    pub fn norm(&self, a: &Cochain) -> Result<f64> {
        Ok(self.inner(a, a)?.max(0.0).sqrt())
    }

    /// Symmetrised cup product α ⌣ β of a 1-cochain and a 2-cochain on a 3-complex:
    /// ½[α(v0v1)β(v1v2v3) + β(v0v1v2)α(v2v3)] on each tetrahedron.
    pub fn cup(&self, a: &Cochain, b: &Cochain) -> Result<Cochain> {
        if self.dim() != 3 {
            return Err(Error::WrongDimension { expected: 3, found: self.dim() });
        }
        a.check(&self.complex, 1)?;
        b.check(&self.complex, 2)?;
        let c = &self.complex;
        let find = |v: &[usize]| c.find(v).expect("face of tetrahedron");
        let values = (0..c.count(3))
            .map(|t| {
                let v = c.simplex(3, t);
                let front = a.values[find(&[v[0], v[1]])] * b.values[find(&[v[1], v[2], v[3]])];
                let back = b.values[find(&[v[0], v[1], v[2]])] * a.values[find(&[v[2], v[3]])];
                0.5 * (front + back) * c.orientation(t) as f64
            })
            .collect();
        Ok(self.cochain(3, values))
    }

    /// K = dᵀ ⋆₂ d on 1-cochains.
    pub fn stiffness(&self) -> &Csr {
        &self.stiffness
    }

    pub fn apply_stiffness(&self, phi: &Cochain) -> Result<Cochain> {
        phi.check(&self.complex, 1)?;
        Ok(self.cochain(1, linalg::spmv(&self.stiffness, &phi.values)))
    }

    /// Global edge indices of top cell `c`, in local lexicographic order.
    pub fn cell_edges(&self, c: usize) -> &[usize] {
        &self.cell_edges[c]
    }

    /// Contribution K_c of top cell `c` to the stiffness, indexed like [`Self::cell_edges`].
    pub fn cell_stiffness(&self, c: usize) -> &DMatrix<f64> {
        &self.cell_stiffness[c]
    }

    /// (Σ_{c ∈ cells} K_c v) restricted to the edge `e`.
    pub fn partial_stiffness_at(&self, cells: &[usize], v: &[f64], e: usize) -> f64 {
        let mut s = 0.0;
        for &c in cells {
            let edges = &self.cell_edges[c];
            let Some(p) = edges.iter().position(|&x| x == e) else { continue };
            let kc = &self.cell_stiffness[c];
            for (q, &g) in edges.iter().enumerate() {
                s += kc[(p, q)] * v[g];
            }
        }
        s
    }

    /// Vertex Laplacian dᵀ ⋆₁ d (not divided by ⋆₀).
    pub fn laplacian0(&self) -> Csr {
        let d0 = &self.d[0];
        linalg::matmul(&linalg::transpose(d0), &linalg::matmul(self.stars[1].matrix(), d0))
    }

    /// dᵀ ⋆₁ φ, i.e. ⋆₀ δφ.
    pub fn weak_divergence(&self, phi: &Cochain) -> Result<Vec<f64>> {
        phi.check(&self.complex, 1)?;
        Ok(linalg::spmv_t(&self.d[0], &self.stars[1].apply(&phi.values)))
    }

    /// Vertex cochain sampling `f` at the representative vertex coordinates.
    pub fn sample_vertex_fn(&self, f: impl Fn(&[f64]) -> f64) -> Cochain {
        let values = self.metric.vertex_coords().iter().map(|x| f(x)).collect();
        self.cochain(0, values)
    }

    /// Edge integrals of the 1-form with coefficient field `f` (3-point Gauss),
    /// measured in the frame of the first cell containing each edge.
    pub fn sample_one_form(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Cochain {
        let g = (0.6f64).sqrt() / 2.0;
        let nodes = [(0.5 - g, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + g, 5.0 / 18.0)];
        let values = (0..self.complex.count(1))
            .map(|e| {
                let c = self.complex.cells_containing(1, e)[0];
                let pts = self.metric.points_in_cell(&self.complex, c, self.complex.simplex(1, e));
                let (p, q) = (pts[0], pts[1]);
                let dir: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
                nodes
                    .iter()
                    .map(|&(t, w)| {
                        let x: Vec<f64> = p.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
                        w * linalg::dot(&f(&x), &dir)
                    })
                    .sum()
            })
            .collect();
        self.cochain(1, values)
    }

    /// Sum of the values of a top-degree cochain (its integral).
    pub fn integrate_top(&self, a: &Cochain) -> Result<f64> {
        a.check(&self.complex, self.dim())?;
        Ok(a.values.iter().sum())
    }
}

#[allow(clippy::too_many_arguments)]
fn local_mass(
    complex: &SimplicialComplex,
    metric: &MetricData,
    kind: StarKind,
    cell: usize,
    frame: &[Vec<f64>],
    faces: &[Vec<usize>],
    global: &[usize],
    k: usize,
) -> DMatrix<f64> {
    let n = complex.dim();
    if kind == StarKind::Whitney && k > 0 && k < n {
        return whitney::whitney_mass(frame, k);
    }
    let verts = complex.simplex(n, cell);
    let diag: Vec<f64> = faces
        .iter()
        .zip(global)
        .map(|(f, &g)| {
            let face: Vec<usize> = f.iter().map(|&p| verts[p]).collect();
            metric.barycentric_dual_part(complex, cell, &face) / metric.volume(k, g)
        })
        .collect();
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag))
}
