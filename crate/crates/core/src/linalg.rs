//! Dense symmetric positive-definite solves for the small systems used by the
//! exponential-family and Bayesian-regression routines.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type Matrix<T> = Vec<Vec<T>>;

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.len();
    let mut l = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        if a[i].len() != n {
            return Err(Error::InvalidArgument("matrix must be square".into()));
        }
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s = s - l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > T::zero()) {
                    return Err(Error::InvalidArgument(
                        "matrix is not positive definite".into(),
                    ));
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Solves `L Lᵀ x = b`.
pub fn cholesky_solve<T: Real>(l: &Matrix<T>, b: &[T]) -> Vec<T> {
    let n = l.len();
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s = s - l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s = s - l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}

/// Inverse of a symmetric positive-definite matrix.
pub fn spd_inverse<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let l = cholesky(a)?;
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        cols.push(cholesky_solve(&l, &e));
    }
    // symmetrize the column solutions
    Ok((0..n)
        .map(|i| (0..n).map(|j| (cols[j][i] + cols[i][j]) / (T::one() + T::one())).collect())
        .collect())
}

pub fn quad_form<T: Real>(a: &Matrix<T>, x: &[T]) -> T {
    let mut s = T::zero();
    for (i, r) in a.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            s = s + x[i] * *v * x[j];
        }
    }
    s
}

pub fn trace<T: Real>(a: &Matrix<T>) -> T {
    (0..a.len()).fold(T::zero(), |s, i| s + a[i][i])
}

pub fn norm2<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |s, v| s + *v * *v).sqrt()
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + *x * *y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_and_inverse() {
        let a = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let l = cholesky(&a).unwrap();
        let x = cholesky_solve(&l, &[1.0, 2.0]);
        assert!((4.0 * x[0] + x[1] - 1.0_f64).abs() < 1e-14);
        assert!((x[0] + 3.0 * x[1] - 2.0_f64).abs() < 1e-14);
        let inv = spd_inverse(&a).unwrap();
        assert!((inv[0][0] - 3.0 / 11.0_f64).abs() < 1e-14);
        assert!(cholesky(&vec![vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
    }
}
