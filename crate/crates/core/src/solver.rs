//! Sparse symmetric solves with exact constraints, and dense kernel extraction.

use std::fmt;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Csr};

/// Tolerances shared by all solves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Relative residual target for CG.
    pub tol: f64,
    /// Iteration cap; 0 means 10·(unknowns) + 100.
    pub max_iter: usize,
    /// Eigenvalues below `kernel_threshold · λ_max` count as kernel.
    pub kernel_threshold: f64,
    /// Required ratio between the smallest rejected and largest accepted eigenvalue.
    pub spectral_gap: f64,
    /// Maximum size for dense eigendecompositions.
    pub dense_cap: usize,
    /// Residual-correction passes after CG converges.
    #[serde(default)]
    pub refinements: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 0, kernel_threshold: 1e-9, spectral_gap: 1e3, dense_cap: 20_000, refinements: 2 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// ‖b − Ax‖ / ‖b‖ recomputed from the returned solution.
    pub relative_residual: f64,
    pub kernel_dim: Option<usize>,
    pub wall_time_s: f64,
    pub converged: bool,
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} iterations, relative residual {:.3e}, {:.3}s",
            self.iterations, self.relative_residual, self.wall_time_s
        )?;
        if let Some(k) = self.kernel_dim {
            write!(f, ", kernel dim {k}")?;
        }
        Ok(())
    }
}

/// Solve A x = b with x[i] = v for every (i, v) in `fixed`, by eliminating the
/// fixed unknowns and running Jacobi-preconditioned CG from zero on the rest.
///
/// A must be symmetric positive semidefinite. Singular systems are fine as long
/// as the reduced right-hand side is consistent; an inconsistent one stalls and
/// is reported as [`Error::Inconsistent`].
pub fn solve_spsd(a: &Csr, b: &[f64], fixed: &[(usize, f64)], cfg: &SolverConfig) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::LengthMismatch { expected: n, found: b.len() });
    }
    let mut is_fixed = vec![false; n];
    let mut x = vec![0.0; n];
    for &(i, v) in fixed {
        if i >= n {
            return Err(Error::InvalidParameter(format!("constraint index {i} out of range")));
        }
        is_fixed[i] = true;
        x[i] = v;
    }
    let free: Vec<usize> = (0..n).filter(|&i| !is_fixed[i]).collect();
    let ax = linalg::spmv(a, &x);
    let rhs: Vec<f64> = free.iter().map(|&i| b[i] - ax[i]).collect();
    let reduced = linalg::submatrix(a, &free, &free);
    let (mut y, mut report) = cg(&reduced, &rhs, cfg);
    if report.converged {
        let bnorm = linalg::norm2(&rhs);
        for _ in 0..cfg.refinements {
            let r = linalg::sub(&rhs, &linalg::spmv(&reduced, &y));
            if linalg::norm2(&r) == 0.0 {
                break;
            }
            let (c, _) = cg(&reduced, &r, cfg);
            let y2 = linalg::added(&y, &c);
            let rel = linalg::norm2(&linalg::sub(&rhs, &linalg::spmv(&reduced, &y2))) / bnorm;
            if rel >= report.relative_residual {
                break;
            }
            y = y2;
            report.relative_residual = rel;
        }
    }
    for (k, &i) in free.iter().enumerate() {
        x[i] = y[k];
    }
    report.wall_time_s = start.elapsed().as_secs_f64();
    if report.converged {
        Ok((x, report))
    } else if report.relative_residual < 1e-6 || report.iterations < max_iter(cfg, free.len()) {
        // stalled well short of the cap: the right-hand side has a kernel component
        Err(Error::Inconsistent(report))
    } else {
        Err(Error::NotConverged(report))
    }
}

fn max_iter(cfg: &SolverConfig, n: usize) -> usize {
    if cfg.max_iter == 0 {
        10 * n + 100
    } else {
        cfg.max_iter
    }
}

/// Preconditioned CG on a (possibly singular) SPSD matrix, from x = 0.
fn cg(a: &Csr, b: &[f64], cfg: &SolverConfig) -> (Vec<f64>, SolveReport) {
    let n = b.len();
    let bnorm = linalg::norm2(b);
    let mut x = vec![0.0; n];
    if n == 0 || bnorm == 0.0 {
        return (x, SolveReport { converged: true, ..Default::default() });
    }
    let inv_diag: Vec<f64> = linalg::diag_of(a).iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let precond = |r: &[f64]| -> Vec<f64> { r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect() };

    let cap = max_iter(cfg, n);
    let mut r = b.to_vec();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = linalg::dot(&r, &z);
    let mut best = (f64::INFINITY, x.clone());
    let mut since_best = 0;
    let mut it = 0;
    while it < cap {
        it += 1;
        let ap = linalg::spmv(a, &p);
        let pap = linalg::dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        linalg::axpy(&mut x, alpha, &p);
        linalg::axpy(&mut r, -alpha, &ap);
        // recompute the true residual now and then to avoid drift
        if it % 50 == 0 {
            let ax = linalg::spmv(a, &x);
            r = linalg::sub(b, &ax);
        }
        let rel = linalg::norm2(&r) / bnorm;
        if rel < best.0 * 0.999 {
            best = (rel, x.clone());
            since_best = 0;
        } else {
            since_best += 1;
        }
        if rel <= cfg.tol {
            break;
        }
        if since_best > 200 + n / 2 {
            break;
        }
        z = precond(&r);
        let rz_new = linalg::dot(&r, &z);
        p = z.iter().zip(&p).map(|(zi, pi)| zi + rz_new / rz * pi).collect();
        rz = rz_new;
    }
    let true_rel = |x: &[f64]| linalg::norm2(&linalg::sub(b, &linalg::spmv(a, x))) / bnorm;
    let mut rel = true_rel(&x);
    if best.0.is_finite() {
        let rel_best = true_rel(&best.1);
        if rel_best < rel {
            x = best.1;
            rel = rel_best;
        }
    }
    let converged = rel <= cfg.tol;
    (x, SolveReport { iterations: it, relative_residual: rel, kernel_dim: None, wall_time_s: 0.0, converged })
}

/// Symmetric eigendecomposition of the pencil (A, M), M positive definite.
/// Returns ascending eigenvalues and M-orthonormal eigenvectors (columns).
fn pencil_eigen(a: &DMatrix<f64>, m: Option<&DMatrix<f64>>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let sym = (a + a.transpose()) * 0.5;
    let (c, back) = match m {
        None => (sym, None),
        Some(m) => {
            let chol = m
                .clone()
                .cholesky()
                .ok_or_else(|| Error::InvalidParameter("mass matrix is not positive definite".into()))?;
            let l = chol.l();
            let linv = l
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::InvalidParameter("singular mass factor".into()))?;
            let c = &linv * sym * linv.transpose();
            (((&c + c.transpose()) * 0.5), Some(linv.transpose()))
        }
    };
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(i).into_owned();
        let v = match &back {
            Some(b) => b * v,
            None => v,
        };
        vecs.set_column(k, &v);
    }
    Ok((values, vecs))
}

/// Split sorted non-negative spectral values at `threshold · max` and check
/// the gap between the two groups.
fn split_spectrum(values: &[f64], cfg: &SolverConfig) -> Result<usize> {
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return Ok(values.len());
    }
    let cut = cfg.kernel_threshold * max;
    let k = values.iter().take_while(|&&v| v < cut).count();
    if k < values.len() {
        let rejected = values[k];
        let accepted = if k > 0 { values[k - 1].max(0.0) } else { cut / cfg.spectral_gap };
        let floor = f64::EPSILON * max;
        if rejected < cfg.spectral_gap * accepted.max(floor) && k > 0 {
            return Err(Error::SpectralGap { accepted, rejected });
        }
        if k == 0 && rejected < cut * cfg.spectral_gap {
            return Err(Error::SpectralGap { accepted: cut, rejected });
        }
    }
    Ok(k)
}

/// Orthonormal basis (in the M inner product, or Euclidean if `mass` is None) of
/// the near-kernel of the symmetric matrix `a`.
pub fn nullspace(a: &DMatrix<f64>, mass: Option<&DMatrix<f64>>, cfg: &SolverConfig) -> Result<Vec<DVector<f64>>> {
    let n = a.nrows();
    if n > cfg.dense_cap {
        return Err(Error::CapExceeded { size: n, cap: cfg.dense_cap });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let (values, vecs) = pencil_eigen(a, mass)?;
    let k = split_spectrum(&values, cfg)?;
    Ok((0..k).map(|i| vecs.column(i).into_owned()).collect())
}

/// Sparse convenience wrapper around [`nullspace`].
pub fn nullspace_sparse(a: &Csr, mass: Option<&Csr>, cfg: &SolverConfig) -> Result<Vec<DVector<f64>>> {
    if a.nrows() > cfg.dense_cap {
        return Err(Error::CapExceeded { size: a.nrows(), cap: cfg.dense_cap });
    }
    let m = mass.map(linalg::to_dense);
    nullspace(&linalg::to_dense(a), m.as_ref(), cfg)
}

/// Rank and right kernel of a rectangular matrix from its singular values, with
/// the same threshold and gap rule as [`nullspace`].
pub fn rank_and_kernel(a: &DMatrix<f64>, cfg: &SolverConfig) -> Result<(usize, Vec<DVector<f64>>)> {
    let (m, n) = a.shape();
    if m.max(n) > cfg.dense_cap {
        return Err(Error::CapExceeded { size: m.max(n), cap: cfg.dense_cap });
    }
    if n == 0 {
        return Ok((0, Vec::new()));
    }
    // pad to at least n rows so that V is complete
    let padded = if m < n {
        let mut p = DMatrix::zeros(n, n);
        p.rows_mut(0, m).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let k = split_spectrum(&values, cfg)?;
    let kernel = order[..k].iter().map(|&i| vt.row(i).transpose()).collect();
    Ok((n - k, kernel))
}

pub fn numerical_rank(a: &DMatrix<f64>, cfg: &SolverConfig) -> Result<usize> {
    Ok(rank_and_kernel(a, cfg)?.0)
}
