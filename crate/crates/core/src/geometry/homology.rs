//! Ranks of simplicial (relative) homology.
//!
//! Boundary matrices are reduced column by column over the prime field F_p with
//! p = 2³¹ − 1. For torsion-free complexes this equals the rank over ℚ, which is
//! all that matters for de Rham dimensions.

use std::collections::HashMap;

use super::complex::SimplicialComplex;

const P: u64 = 2_147_483_647;

fn inv_mod(a: u64) -> u64 {
    // Fermat: a^(p-2)
    let mut result = 1u64;
    let mut base = a % P;
    let mut exp = P - 2;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * base % P;
        }
        base = base * base % P;
        exp >>= 1;
    }
    result
}

fn to_field(x: i64) -> u64 {
    x.rem_euclid(P as i64) as u64
}

/// Rank over F_p of a sparse matrix given as columns of (row, value) pairs.
/// Pivots are the largest row index of each reduced column; ties are resolved in
/// column order, so the result is deterministic.
pub fn column_rank(columns: Vec<Vec<(usize, i64)>>) -> usize {
    let mut pivots: HashMap<usize, Vec<(usize, u64)>> = HashMap::new();
    let mut rank = 0;
    for col in columns {
        let mut c: Vec<(usize, u64)> = col
            .into_iter()
            .filter_map(|(r, v)| {
                let f = to_field(v);
                (f != 0).then_some((r, f))
            })
            .collect();
        c.sort_unstable_by_key(|e| e.0);
        loop {
            let Some(&(low, val)) = c.last() else { break };
            let Some(piv) = pivots.get(&low) else {
                pivots.insert(low, c);
                rank += 1;
                break;
            };
            let piv_low = piv.last().expect("pivot column non-empty").1;
            let factor = val * inv_mod(piv_low) % P;
            c = axpy_sparse(&c, piv, factor);
        }
    }
    rank
}

/// a − factor·b for sorted sparse columns over F_p.
fn axpy_sparse(a: &[(usize, u64)], b: &[(usize, u64)], factor: u64) -> Vec<(usize, u64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i]);
            i += 1;
        } else if take_b {
            out.push((b[j].0, (P - b[j].1 * factor % P) % P));
            j += 1;
        } else {
            let v = (a[i].1 + P - b[j].1 * factor % P) % P;
            if v != 0 {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Rank of ∂_k restricted to simplices selected by `keep` (in both degrees).
fn boundary_rank(complex: &SimplicialComplex, k: usize, keep: &dyn Fn(usize, usize) -> bool) -> usize {
    if k == 0 || k > complex.dim() {
        return 0;
    }
    let cols = (0..complex.count(k))
        .filter(|&i| keep(k, i))
        .map(|i| {
            complex
                .faces(k, i)
                .iter()
                .filter(|&&(f, _)| keep(k - 1, f))
                .map(|&(f, s)| (f, s as i64))
                .collect()
        })
        .collect();
    column_rank(cols)
}

fn betti_with(complex: &SimplicialComplex, top: usize, keep: &dyn Fn(usize, usize) -> bool) -> Vec<usize> {
    let ranks: Vec<usize> = (0..=top + 1).map(|k| if k > top { 0 } else { boundary_rank(complex, k, keep) }).collect();
    (0..=top)
        .map(|k| {
            let dim = (0..complex.count(k)).filter(|&i| keep(k, i)).count();
            dim - ranks[k] - ranks[k + 1]
        })
        .collect()
}

/// Betti numbers b_0..b_n of the complex, or of the pair (U, ∂U) when `relative`.
pub fn betti_numbers(complex: &SimplicialComplex, relative: bool) -> Vec<usize> {
    if relative {
        betti_with(complex, complex.dim(), &|k, i| !complex.is_boundary(k, i))
    } else {
        betti_with(complex, complex.dim(), &|_, _| true)
    }
}

/// Betti numbers b_0..b_{n-1} of the boundary subcomplex ∂U.
pub fn boundary_betti_numbers(complex: &SimplicialComplex) -> Vec<usize> {
    betti_with(complex, complex.dim() - 1, &|k, i| complex.is_boundary(k, i))
}

/// Whether an (n-1)-chain (as coefficients on (n-1)-simplices) is null in
/// H_{n-1}(U, ∂U), i.e. lies in im ∂_n + C_{n-1}(∂U).
pub fn is_relatively_null(complex: &SimplicialComplex, coeffs: &[i64]) -> bool {
    let n = complex.dim();
    let keep = |k: usize, i: usize| !complex.is_boundary(k, i);
    let base = boundary_rank(complex, n, &keep);
    let mut cols: Vec<Vec<(usize, i64)>> = (0..complex.count(n))
        .map(|i| {
            complex
                .faces(n, i)
                .iter()
                .filter(|&&(f, _)| keep(n - 1, f))
                .map(|&(f, s)| (f, s as i64))
                .collect()
        })
        .collect();
    cols.push(
        coeffs
            .iter()
            .enumerate()
            .filter(|&(f, &c)| c != 0 && keep(n - 1, f))
            .map(|(f, &c)| (f, c))
            .collect(),
    );
    column_rank(cols) == base
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_small_matrix() {
        // columns (1,1,0), (0,1,1), (1,2,1) -> rank 2
        let cols = vec![vec![(0, 1), (1, 1)], vec![(1, 1), (2, 1)], vec![(0, 1), (1, 2), (2, 1)]];
        assert_eq!(column_rank(cols), 2);
        assert_eq!(column_rank(vec![vec![], vec![(3, -2)]]), 1);
    }

    #[test]
    fn hollow_triangle_is_a_circle() {
        // boundary of a triangle as the boundary complex of a filled triangle
        let c = SimplicialComplex::from_cells(2, 3, &[vec![0, 1, 2]]).unwrap();
        assert_eq!(betti_numbers(&c, false), vec![1, 0, 0]);
        assert_eq!(boundary_betti_numbers(&c), vec![1, 1]);
        assert_eq!(betti_numbers(&c, true), vec![0, 0, 1]);
    }
}
