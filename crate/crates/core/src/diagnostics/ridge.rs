//! Penalized least squares via the normal equations.

use alloc::vec;
use alloc::vec::Vec;

use super::features::FeatureMatrix;
use super::DiagError;

/// Cholesky factorization of a symmetric positive definite matrix stored
/// row-major; returns false if a pivot is not strictly positive.
fn cholesky(a: &mut [f64], n: usize) -> bool {
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= a[i * n + k] * a[j * n + k];
            }
            if i == j {
                if !(sum > 0.0) {
                    return false;
                }
                a[i * n + i] = libm::sqrt(sum);
            } else {
                a[i * n + j] = sum / a[j * n + j];
            }
        }
    }
    true
}

fn solve_with_factor(l: &[f64], b: &mut [f64], n: usize) {
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * b[k];
        }
        b[i] = sum / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut sum = b[i];
        for k in i + 1..n {
            sum -= l[k * n + i] * b[k];
        }
        b[i] = sum / l[i * n + i];
    }
}

/// Fits `y ~ intercept + features` on the selected rows, shrinking every
/// coefficient (intercept included) by `lambda`. Returns the coefficient
/// vector with the intercept first.
pub fn ridge_fit(
    x: &FeatureMatrix,
    y: &[f64],
    rows: &[usize],
    lambda: f64,
) -> Result<Vec<f64>, DiagError> {
    if y.len() != x.rows() {
        return Err(DiagError::LengthMismatch {
            expected: x.rows(),
            got: y.len(),
        });
    }
    if !(lambda > 0.0) {
        return Err(DiagError::InvalidConfig("ridge penalty must be positive"));
    }
    let p = x.cols() + 1;
    let mut gram = vec![0.0f64; p * p];
    let mut rhs = vec![0.0f64; p];
    let mut phi = vec![0.0f64; p];
    for &r in rows {
        phi[0] = 1.0;
        phi[1..].copy_from_slice(x.row(r));
        for i in 0..p {
            rhs[i] += phi[i] * y[r];
            for j in 0..=i {
                gram[i * p + j] += phi[i] * phi[j];
            }
        }
    }
    for i in 0..p {
        for j in i + 1..p {
            gram[i * p + j] = gram[j * p + i];
        }
        gram[i * p + i] += lambda;
    }
    if !cholesky(&mut gram, p) {
        return Err(DiagError::InvalidConfig("normal equations are singular"));
    }
    solve_with_factor(&gram, &mut rhs, p);
    Ok(rhs)
}

/// Evaluates a fitted coefficient vector on one row.
pub fn predict(x: &FeatureMatrix, beta: &[f64], row: usize) -> f64 {
    let mut acc = beta[0];
    for (b, v) in beta[1..].iter().zip(x.row(row)) {
        acc += b * v;
    }
    acc
}
