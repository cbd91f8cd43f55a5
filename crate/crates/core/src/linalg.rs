//! Small sparse/dense helpers on top of nalgebra-sparse.

use nalgebra::DMatrix;
use nalgebra_sparse::{CooMatrix, CsrMatrix};

pub type Csr = CsrMatrix<f64>;

/// Assemble a CSR matrix from triplets; duplicates are summed.
pub fn csr_from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Csr {
    let mut coo = CooMatrix::new(rows, cols);
    for &(i, j, v) in triplets {
        coo.push(i, j, v);
    }
    let mut csr = CsrMatrix::from(&coo);
    // drop explicit zeros created by cancellation so sparsity patterns stay tight
    csr = drop_zeros(&csr);
    csr
}

fn drop_zeros(a: &Csr) -> Csr {
    let mut coo = CooMatrix::new(a.nrows(), a.ncols());
    for (i, row) in a.row_iter().enumerate() {
        for (&j, &v) in row.col_indices().iter().zip(row.values()) {
            if v != 0.0 {
                coo.push(i, j, v);
            }
        }
    }
    CsrMatrix::from(&coo)
}

pub fn identity(n: usize) -> Csr {
    CsrMatrix::identity(n)
}

pub fn diagonal(d: &[f64]) -> Csr {
    let t: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
    csr_from_triplets(d.len(), d.len(), &t)
}

/// y = A x, summed in fixed order.
pub fn spmv(a: &Csr, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.ncols(), x.len(), "spmv dimension mismatch");
    a.row_iter()
        .map(|row| row.col_indices().iter().zip(row.values()).map(|(&j, &v)| v * x[j]).sum())
        .collect()
}

/// y = Aᵀ x.
pub fn spmv_t(a: &Csr, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.nrows(), x.len(), "spmv_t dimension mismatch");
    let mut y = vec![0.0; a.ncols()];
    for (i, row) in a.row_iter().enumerate() {
        let xi = x[i];
        if xi == 0.0 {
            continue;
        }
        for (&j, &v) in row.col_indices().iter().zip(row.values()) {
            y[j] += v * xi;
        }
    }
    y
}

pub fn transpose(a: &Csr) -> Csr {
    a.transpose()
}

pub fn matmul(a: &Csr, b: &Csr) -> Csr {
    drop_zeros(&(a * b))
}

pub fn add(a: &Csr, b: &Csr) -> Csr {
    drop_zeros(&(a + b))
}

pub fn scale(a: &Csr, s: f64) -> Csr {
    a * s
}

/// Rows `rows` and columns `cols` of `a`, renumbered in the given order.
pub fn submatrix(a: &Csr, rows: &[usize], cols: &[usize]) -> Csr {
    let mut col_map = vec![usize::MAX; a.ncols()];
    for (k, &j) in cols.iter().enumerate() {
        col_map[j] = k;
    }
    let mut t = Vec::new();
    for (r, &i) in rows.iter().enumerate() {
        let row = a.row(i);
        for (&j, &v) in row.col_indices().iter().zip(row.values()) {
            if col_map[j] != usize::MAX {
                t.push((r, col_map[j], v));
            }
        }
    }
    csr_from_triplets(rows.len(), cols.len(), &t)
}

pub fn to_dense(a: &Csr) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.nrows(), a.ncols());
    for (i, row) in a.row_iter().enumerate() {
        for (&j, &v) in row.col_indices().iter().zip(row.values()) {
            m[(i, j)] += v;
        }
    }
    m
}

pub fn diag_of(a: &Csr) -> Vec<f64> {
    let mut d = vec![0.0; a.nrows().min(a.ncols())];
    for (i, row) in a.row_iter().enumerate().take(d.len()) {
        for (&j, &v) in row.col_indices().iter().zip(row.values()) {
            if j == i {
                d[i] += v;
            }
        }
    }
    d
}

/// Largest |A − Aᵀ| entry.
pub fn asymmetry(a: &Csr) -> f64 {
    let t = a.transpose();
    let diff = drop_zeros(&(a - &t));
    diff.values().iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (a, b) in y.iter_mut().zip(x) {
        *a += alpha * b;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn added(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}
