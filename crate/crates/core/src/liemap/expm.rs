use nalgebra::DMatrix;

use crate::error::{Error, Result};

const MAX_TERMS: usize = 60;

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

// 1-norm of I + e without forming it
fn norm1_plus_identity(e: &DMatrix<f64>) -> f64 {
    e.column_iter()
        .enumerate()
        .map(|(j, c)| c.iter().enumerate().map(|(i, v)| if i == j { (v + 1.0).abs() } else { v.abs() }).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(a)` by scaling and squaring around a truncated Taylor series.
///
/// `a` is scaled by `2^-s` until its 1-norm is at most 1/2; the series is
/// summed until the next term's 1-norm falls below `tol` relative to the
/// partial sum, then squared back `s` times.
///
/// The series and the squarings carry `E = exp(·) − I` rather than the
/// exponential itself (`(I + E)² = I + 2E + E²`). Heavily scaled arguments
/// leave `E` tiny, and adding the identity before squaring would round most
/// of it away.
pub fn expm(a: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.nrows();
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix exponential argument".into()));
    }
    let norm = norm1(a);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a * 2f64.powi(-squarings);

    let mut sum = DMatrix::zeros(n, n);
    let mut term = DMatrix::identity(n, n);
    let mut residual = f64::INFINITY;
    let mut converged = false;
    for k in 1..=MAX_TERMS {
        term = (&term * &scaled) / k as f64;
        sum += &term;
        residual = norm1(&term) / norm1_plus_identity(&sum).max(f64::MIN_POSITIVE);
        if residual <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged { residual, terms: MAX_TERMS });
    }
    for _ in 0..squarings {
        sum = &sum * &sum + &sum * 2.0;
    }
    for i in 0..n {
        sum[(i, i)] += 1.0;
    }
    if sum.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix exponential result".into()));
    }
    Ok(sum)
}
