use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{solve_vertex_laplacian, Flavor};
use crate::dec::{Cochain, Dec};
use crate::error::{Error, Result};
use crate::geometry::{betti_numbers, column_rank};
use crate::linalg::{self, Csr};
use crate::solver::{nullspace_sparse, rank_and_kernel, SolverConfig};

/// ⋆₁ d₀ as an edge × vertex matrix.
fn star_d0(dec: &Dec) -> Csr {
    linalg::matmul(dec.star(1).matrix(), dec.d_matrix(0))
}

/// K + (⋆₁d₀) ⋆₀⁻¹ (⋆₁d₀)ᵀ restricted to the given edges and vertices.
fn hodge_laplacian1(dec: &Dec, edges: &[usize], verts: &[usize]) -> Csr {
    let b = linalg::submatrix(&star_d0(dec), edges, verts);
    let m0 = dec.star(0).weights().expect("diagonal vertex star");
    let inv: Vec<f64> = verts.iter().map(|&v| 1.0 / m0[v]).collect();
    let bd = linalg::matmul(&b, &linalg::diagonal(&inv));
    let grad = linalg::matmul(&bd, &linalg::transpose(&b));
    linalg::add(&linalg::submatrix(dec.stiffness(), edges, edges), &grad)
}

fn selection(dec: &Dec, k: usize, flavor: Flavor) -> Vec<usize> {
    match flavor {
        Flavor::Neumann => (0..dec.complex().count(k)).collect(),
        Flavor::Dirichlet => dec.complex().interior_indices(k),
    }
}

/// Fix the sign of a basis vector so that its largest entry is positive.
fn normalize_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    for &x in v.iter() {
        if x.abs() > best.abs() * (1.0 + 1e-9) {
            best = x;
        }
    }
    if best < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Hodge-orthonormal basis of the discrete harmonic fields H¹_N (closed and
/// co-closed at every vertex) or H¹_D (zero tangential trace, closed, co-closed
/// at interior vertices).
pub fn harmonic_basis(dec: &Dec, flavor: Flavor, cfg: &SolverConfig) -> Result<Vec<Cochain>> {
    let edges = selection(dec, 1, flavor);
    let verts = selection(dec, 0, flavor);
    let s = hodge_laplacian1(dec, &edges, &verts);
    let mass = linalg::submatrix(dec.star(1).matrix(), &edges, &edges);
    let kernel = nullspace_sparse(&s, Some(&mass), cfg)?;
    Ok(kernel
        .into_iter()
        .map(|v| {
            let mut values = vec![0.0; dec.complex().count(1)];
            for (k, &e) in edges.iter().enumerate() {
                values[e] = v[k];
            }
            normalize_sign(&mut values);
            dec.cochain(1, values)
        })
        .collect())
}

/// The four Hodge–Morrey–Friedrichs components of a 1-cochain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HmfDecomposition {
    /// d of a vertex cochain vanishing on ∂U.
    pub exact_dirichlet: Cochain,
    /// Projection onto H¹_N.
    pub harmonic_neumann: Cochain,
    /// Harmonic and exact: closed, co-closed in the interior.
    pub harmonic_exact: Cochain,
    /// Remainder, co-exact with natural boundary conditions.
    pub coexact_neumann: Cochain,
    /// ‖α − Σ parts‖ / ‖α‖.
    pub residual: f64,
    /// max |⟨a, b⟩| / (‖a‖‖b‖) over the six pairs.
    pub max_orthogonality: f64,
    /// How far the co-exact part is from being co-closed and orthogonal to H¹_N.
    pub coexact_residual: f64,
}

impl HmfDecomposition {
    pub fn parts(&self) -> [&Cochain; 4] {
        [&self.exact_dirichlet, &self.harmonic_neumann, &self.harmonic_exact, &self.coexact_neumann]
    }
}

pub fn hmf_decompose(dec: &Dec, alpha: &Cochain, cfg: &SolverConfig) -> Result<HmfDecomposition> {
    let basis = harmonic_basis(dec, Flavor::Neumann, cfg)?;
    hmf_decompose_with(dec, alpha, &basis, cfg)
}

/// Same as [`hmf_decompose`] with a precomputed orthonormal H¹_N basis.
pub fn hmf_decompose_with(dec: &Dec, alpha: &Cochain, basis: &[Cochain], cfg: &SolverConfig) -> Result<HmfDecomposition> {
    alpha.check(dec.complex(), 1)?;
    let rhs = dec.weak_divergence(alpha)?;
    let (psi_d, _) = solve_vertex_laplacian(dec, &rhs, Flavor::Dirichlet, cfg)?;
    let exact_dirichlet = dec.d(&psi_d)?;
    let (psi_full, _) = solve_vertex_laplacian(dec, &rhs, Flavor::Neumann, cfg)?;
    let exact_all = dec.d(&psi_full)?;
    let harmonic_exact = exact_all.sub(&exact_dirichlet)?;
    let mut harmonic_neumann = dec.zeros(1);
    for h in basis {
        harmonic_neumann = harmonic_neumann.axpy(dec.inner(alpha, h)?, h)?;
    }
    let coexact_neumann = alpha.sub(&exact_all)?.sub(&harmonic_neumann)?;

    let parts = [&exact_dirichlet, &harmonic_neumann, &harmonic_exact, &coexact_neumann];
    let norms: Vec<f64> = parts.iter().map(|p| dec.norm(p)).collect::<Result<_>>()?;
    let mut max_orthogonality = 0.0f64;
    for i in 0..4 {
        for j in i + 1..4 {
            let denom = norms[i] * norms[j];
            if denom > 0.0 {
                max_orthogonality = max_orthogonality.max(dec.inner(parts[i], parts[j])?.abs() / denom);
            }
        }
    }
    let mut sum = dec.zeros(1);
    for p in parts {
        sum = sum.add(p)?;
    }
    let an = dec.norm(alpha)?;
    let scale = if an > 0.0 { an } else { 1.0 };
    let residual = dec.norm(&alpha.sub(&sum)?)? / scale;
    let m0 = dec.star(0).weights().expect("diagonal vertex star");
    let div = dec.weak_divergence(&coexact_neumann)?;
    let div_norm = div.iter().zip(m0).map(|(d, w)| d * d / w).sum::<f64>().sqrt();
    let mut coexact_residual = div_norm / scale;
    for h in basis {
        coexact_residual = coexact_residual.max(dec.inner(&coexact_neumann, h)?.abs() / scale);
    }
    Ok(HmfDecomposition {
        exact_dirichlet,
        harmonic_neumann,
        harmonic_exact,
        coexact_neumann,
        residual,
        max_orthogonality,
        coexact_residual,
    })
}

/// Dimensions around the boundary-conditions map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuliReport {
    /// Solutions with fixed (zero) Dirichlet data: dim ker K restricted to interior edges.
    pub fixed_dirichlet_solution_dim: usize,
    /// Rank of d on vertex cochains vanishing on ∂U.
    pub interior_gauge_dim: usize,
    pub h1_neumann_dim: usize,
    pub h1_dirichlet_dim: usize,
    /// Dimension of the discrete L_U (interior equations plus interior Lorentz gauge).
    pub domain_dim: usize,
    pub boundary_map_rank: usize,
    pub boundary_map_kernel_dim: usize,
    pub betti: Vec<usize>,
    pub relative_betti: Vec<usize>,
}

/// Matrix of the boundary-conditions map on a basis of the discrete L_U.
#[derive(Clone, Debug)]
pub struct BoundaryMap {
    /// Rows: Dirichlet trace on boundary edges, then the (rescaled) Neumann trace.
    pub matrix: DMatrix<f64>,
    /// Scale applied to the Neumann rows.
    pub neumann_scale: f64,
    /// Euclidean-orthonormal basis of L_U.
    pub domain: Vec<Cochain>,
    /// Elements of L_U with vanishing boundary data.
    pub kernel: Vec<Cochain>,
    pub report: ModuliReport,
}

fn normalized_rows(rows: Vec<Vec<(usize, f64)>>, ncols: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows.len(), ncols);
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

fn csr_rows(a: &Csr, rows: &[usize]) -> Vec<Vec<(usize, f64)>> {
    rows.iter()
        .map(|&i| {
            let r = a.row(i);
            r.col_indices().iter().copied().zip(r.values().iter().copied()).collect()
        })
        .collect()
}

pub fn boundary_map(dec: &Dec, cfg: &SolverConfig) -> Result<BoundaryMap> {
    let c = dec.complex();
    let ne = c.count(1);
    let int_edges = c.interior_indices(1);
    let int_verts = c.interior_indices(0);
    let bdry = c.boundary_indices(1);

    let mut rows = csr_rows(dec.stiffness(), &int_edges);
    rows.extend(csr_rows(&linalg::transpose(&star_d0(dec)), &int_verts));
    let a = normalized_rows(rows, ne);
    let (_, kernel) = rank_and_kernel(&a, cfg)?;
    let domain: Vec<Cochain> = kernel.iter().map(|v| dec.cochain(1, v.iter().copied().collect())).collect();

    let nb = bdry.len();
    let mut top = DMatrix::zeros(nb, domain.len());
    let mut bottom = DMatrix::zeros(nb, domain.len());
    for (j, v) in domain.iter().enumerate() {
        let kv = dec.apply_stiffness(v)?;
        for (i, &e) in bdry.iter().enumerate() {
            top[(i, j)] = v.values[e];
            bottom[(i, j)] = kv.values[e];
        }
    }
    let bn = bottom.norm();
    let neumann_scale = if bn > 0.0 { top.norm() / bn } else { 1.0 };
    let mut matrix = DMatrix::zeros(2 * nb, domain.len());
    matrix.rows_mut(0, nb).copy_from(&top);
    matrix.rows_mut(nb, nb).copy_from(&(bottom * neumann_scale));
    let (rank, kcoef) = rank_and_kernel(&matrix, cfg)?;
    let kernel: Vec<Cochain> = kcoef
        .iter()
        .map(|coef| {
            let mut values = vec![0.0; ne];
            for (j, v) in domain.iter().enumerate() {
                linalg::axpy(&mut values, coef[j], &v.values);
            }
            normalize_sign(&mut values);
            dec.cochain(1, values)
        })
        .collect();

    let k_ii = linalg::submatrix(dec.stiffness(), &int_edges, &int_edges);
    let m_ii = linalg::submatrix(dec.star(1).matrix(), &int_edges, &int_edges);
    let fixed_dirichlet_solution_dim = nullspace_sparse(&k_ii, Some(&m_ii), cfg)?.len();
    let d0t = linalg::transpose(dec.d_matrix(0));
    let gauge_cols: Vec<Vec<(usize, i64)>> = csr_rows(&d0t, &int_verts)
        .into_iter()
        .map(|r| r.into_iter().map(|(e, v)| (e, v.round() as i64)).collect())
        .collect();
    let report = ModuliReport {
        fixed_dirichlet_solution_dim,
        interior_gauge_dim: column_rank(gauge_cols),
        h1_neumann_dim: harmonic_basis(dec, Flavor::Neumann, cfg)?.len(),
        h1_dirichlet_dim: harmonic_basis(dec, Flavor::Dirichlet, cfg)?.len(),
        domain_dim: domain.len(),
        boundary_map_rank: rank,
        boundary_map_kernel_dim: kernel.len(),
        betti: betti_numbers(c, false),
        relative_betti: betti_numbers(c, true),
    };
    if report.boundary_map_rank + report.boundary_map_kernel_dim != report.domain_dim {
        return Err(Error::InvalidParameter("rank-nullity violated in boundary map".into()));
    }
    Ok(BoundaryMap { matrix, neumann_scale, domain, kernel, report })
}

pub fn moduli_report(dec: &Dec, cfg: &SolverConfig) -> Result<ModuliReport> {
    Ok(boundary_map(dec, cfg)?.report)
}
