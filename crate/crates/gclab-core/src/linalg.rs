//! Small dense linear algebra: just enough for occupancy solves.
//!
//! Systems here are at most a few hundred unknowns and the matrices
//! `I - γM` are strictly row diagonally dominant for `γ < 1`, so partial
//! pivoting is ample.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularMatrix;

impl fmt::Display for SingularMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "matrix is singular to working precision")
    }
}

impl core::error::Error for SingularMatrix {}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
/// `a` is row-major and consumed along with `b`.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>, SingularMatrix> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|r| r.len() == n));
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col][col].abs();
        for row in col + 1..n {
            let v = a[row][col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best < 1e-13 {
            return Err(SingularMatrix);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let diag = a[col][col];
        for row in col + 1..n {
            let factor = a[row][col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                let upper = a[col][k];
                a[row][k] -= factor * upper;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Ok(x)
}

/// `out[j] = Σ_i v[i]·m[i][j]` (row vector times matrix).
pub fn vec_mat(v: &[f64], m: &[Vec<f64>]) -> Vec<f64> {
    let cols = m[0].len();
    let mut out = vec![0.0; cols];
    for (i, &vi) in v.iter().enumerate() {
        if vi == 0.0 {
            continue;
        }
        for (j, &mij) in m[i].iter().enumerate() {
            out[j] += vi * mij;
        }
    }
    out
}

/// Dense square matrix product.
pub fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let cols = b[0].len();
    let mut out = vec![vec![0.0; cols]; n];
    for i in 0..n {
        for (k, &aik) in a[i].iter().enumerate() {
            if aik == 0.0 {
                continue;
            }
            for j in 0..cols {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let b = vec![3.0, 5.0];
        let x = solve(a, b).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14);
        assert!((x[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn reports_singularity() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(solve(a, vec![1.0, 2.0]), Err(SingularMatrix));
    }

    #[test]
    fn vec_mat_matches_manual() {
        let m = vec![vec![0.0, 1.0], vec![0.5, 0.5]];
        let out = vec_mat(&[0.25, 0.75], &m);
        assert!((out[0] - 0.375).abs() < 1e-15);
        assert!((out[1] - 0.625).abs() < 1e-15);
    }
}
