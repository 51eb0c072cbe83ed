//! Small dense linear algebra over any [`Scalar`] ring.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::jets::Scalar;

/// Largest supported chart dimension.
pub const MAX_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("matrix is singular (pivot {pivot:.3e} at column {column})")]
pub struct Singular {
    pub column: usize,
    pub pivot: f64,
}

/// Solves `a * x = b` by Gaussian elimination with partial pivoting on the
/// degree-0 values. Works unchanged on `f64` and on jets.
pub fn solve<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Result<Vec<S>, Singular> {
    let n = b.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].value().abs().total_cmp(&a[j][col].value().abs()))
            .expect("non-empty");
        let pivot = a[pivot_row][col].value();
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Singular { column: col, pivot });
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let inv = a[col][col].recip();
        for row in col + 1..n {
            let factor = a[row][col].clone() * inv.clone();
            for k in col + 1..n {
                a[row][k] = a[row][k].clone() - factor.clone() * a[col][k].clone();
            }
            b[row] = b[row].clone() - factor * b[col].clone();
        }
    }
    let mut x: Vec<S> = b.clone();
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc = acc - a[row][k].clone() * x[k].clone();
        }
        x[row] = acc / a[row][row].clone();
    }
    Ok(x)
}

/// Inverse by column-wise solves.
pub fn inverse(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, Singular> {
    let n = a.len();
    let mut inv = vec![vec![0.0; n]; n];
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        let x = solve(a.to_vec(), e)?;
        for row in 0..n {
            inv[row][col] = x[row];
        }
    }
    Ok(inv)
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn symmetric_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (a[i][j] + a[j][i]));
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Spectral condition number `max|ev| / min|ev|` of a symmetric matrix.
pub fn symmetric_condition(a: &[Vec<f64>]) -> f64 {
    let ev = symmetric_eigenvalues(a);
    let max = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = ev.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn mat_vec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(p, q)| p * q).sum())
        .collect()
}

pub fn bilinear(a: &[Vec<f64>], u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(mat_vec(a, v)).map(|(p, q)| p * q).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, c| m.max(c.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_with_pivoting() {
        let a = vec![vec![0.0, 2.0, 1.0], vec![1.0, 1.0, 0.0], vec![3.0, 0.0, 1.0]];
        let x_true = [1.0, -2.0, 0.5];
        let b = mat_vec(&a, &x_true);
        let x = solve(a, b).unwrap();
        for (p, q) in x.iter().zip(x_true) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_is_reported() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve(a, vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let a = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let inv = inverse(&a).unwrap();
        for i in 0..2 {
            let col: Vec<f64> = (0..2).map(|k| inv[k][i]).collect();
            let e = mat_vec(&a, &col);
            for (j, v) in e.iter().enumerate() {
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        let ev = symmetric_eigenvalues(&a);
        assert!((ev[0] * ev[1] - 11.0).abs() < 1e-12);
    }
}
