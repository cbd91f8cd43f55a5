//! Element matrices of the lowest-order Whitney forms on one flat simplex.

use itertools::Itertools;
use nalgebra::DMatrix;

use crate::geometry::{factorial, simplex_volume};

/// Gram matrix of the barycentric gradients ∇λ_0, …, ∇λ_n.
pub(crate) fn gradient_gram(frame: &[Vec<f64>]) -> DMatrix<f64> {
    let n = frame.len() - 1;
    let e = DMatrix::from_fn(frame[0].len(), n, |a, i| frame[i + 1][a] - frame[0][a]);
    let g = e.transpose() * &e;
    let ginv = g.try_inverse().expect("non-degenerate cell");
    let mut gamma = DMatrix::zeros(n + 1, n + 1);
    gamma.view_mut((1, 1), (n, n)).copy_from(&ginv);
    for j in 1..=n {
        let s: f64 = (1..=n).map(|i| ginv[(i - 1, j - 1)]).sum();
        gamma[(0, j)] = -s;
        gamma[(j, 0)] = -s;
    }
    gamma[(0, 0)] = (1..=n).map(|j| -gamma[(0, j)]).sum();
    gamma
}

/// Local k-faces of an n-simplex, as increasing index tuples in lexicographic order.
pub(crate) fn local_faces(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0..=n).combinations(k + 1).collect()
}

fn sub_det(gamma: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    if rows.is_empty() {
        return 1.0;
    }
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| gamma[(rows[i], cols[j])]).determinant()
}

/// Galerkin mass ∫_T ⟨W_σ, W_τ⟩ over local k-faces σ, τ of the cell with the
/// given frame (points in sorted-vertex order).
pub(crate) fn whitney_mass(frame: &[Vec<f64>], k: usize) -> DMatrix<f64> {
    let n = frame.len() - 1;
    let refs: Vec<&[f64]> = frame.iter().map(Vec::as_slice).collect();
    let vol = simplex_volume(&refs);
    let gamma = gradient_gram(frame);
    let faces = local_faces(n, k);
    let w = (n + 1) as f64 * (n + 2) as f64;
    let lam = |a: usize, b: usize| vol * if a == b { 2.0 } else { 1.0 } / w;
    let kf = factorial(k);
    let m = faces.len();
    let mut out = DMatrix::zeros(m, m);
    for (p, s) in faces.iter().enumerate() {
        for (q, t) in faces.iter().enumerate().skip(p) {
            let mut acc = 0.0;
            for i in 0..=k {
                let si: Vec<usize> = s.iter().enumerate().filter(|&(x, _)| x != i).map(|(_, &v)| v).collect();
                for j in 0..=k {
                    let tj: Vec<usize> = t.iter().enumerate().filter(|&(x, _)| x != j).map(|(_, &v)| v).collect();
                    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    acc += sign * lam(s[i], t[j]) * sub_det(&gamma, &si, &tj);
                }
            }
            out[(p, q)] = kf * kf * acc;
            out[(q, p)] = out[(p, q)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_triangle() -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]
    }

    #[test]
    fn top_degree_is_inverse_volume() {
        let m = whitney_mass(&unit_triangle(), 2);
        assert!((m[(0, 0)] - 2.0).abs() < 1e-14);
        let tet = vec![vec![0.0, 0.0, 0.0], vec![2.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 3.0]];
        let m = whitney_mass(&tet, 3);
        assert!((m[(0, 0)] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn degree_zero_is_p1_mass() {
        let m = whitney_mass(&unit_triangle(), 0);
        assert!((m[(0, 0)] - 1.0 / 12.0).abs() < 1e-15);
        assert!((m[(0, 1)] - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn constant_field_energy() {
        // dx sampled on edges (01), (02), (12) of the unit triangle
        let m = whitney_mass(&unit_triangle(), 1);
        let a = nalgebra::DVector::from_row_slice(&[1.0, 0.0, -1.0]);
        let e = (a.transpose() * &m * &a)[0];
        assert!((e - 0.5).abs() < 1e-14);
    }

    #[test]
    fn gradient_gram_rows_sum_to_zero() {
        let g = gradient_gram(&unit_triangle());
        for i in 0..3 {
            assert!(g.row(i).sum().abs() < 1e-14);
        }
    }
}
