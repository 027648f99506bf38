//! Data-driven estimation of map weights from one uniformly sampled trajectory.
//!
//! Each pair `(X_i, X_{i+1})` gives one row of the least-squares problem
//! `min_W Σ_i ‖X_{i+1} − W z(X_i)‖²` where `z` is the stacked monomial vector.
//! The model is linear in `W`, so the minimizer comes from a direct solve.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::liemap::PolynomialMap;
use crate::polybasis::StackedBasis;
use crate::trajectory::TrajectoryDataset;

/// Diagnostics of one fit.
#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    /// Mean squared one-step residual over all pairs and components.
    pub residual_mse: f64,
    /// Frobenius norm of each `W_d`.
    pub weight_norms: Vec<f64>,
    /// Ratio of extreme singular values of the design matrix.
    pub condition_estimate: f64,
    pub ridge: f64,
    pub rank: usize,
    /// Set when the unregularized problem was rank deficient and the
    /// minimum-norm solution was returned.
    pub rank_deficient: bool,
    pub pairs: usize,
}

/// Rows `z(X_0) … z(X_{m−1})`, shape `m × N`.
pub fn design_matrix(data: &TrajectoryDataset, order: usize) -> Result<DMatrix<f64>> {
    let m = data.len().saturating_sub(1);
    design_rows(data.n(), &data.states()[..m], order)
}

fn design_rows(n: usize, inputs: &[Vec<f64>], order: usize) -> Result<DMatrix<f64>> {
    if order < 1 {
        return Err(Error::InvalidArgument("fit order must be at least 1".into()));
    }
    let basis = StackedBasis::new(n, order)?;
    let mut phi = DMatrix::zeros(inputs.len(), basis.len());
    let mut z = vec![0.0; basis.len()];
    for (i, x) in inputs.iter().enumerate() {
        basis.eval_into(x, &mut z);
        for (j, v) in z.iter().enumerate() {
            phi[(i, j)] = *v;
        }
    }
    Ok(phi)
}

/// Least-squares weights of order `order` from one trajectory,
/// ridge-regularized when `ridge > 0`.
pub fn fit_map(data: &TrajectoryDataset, order: usize, ridge: f64) -> Result<(PolynomialMap, FitReport)> {
    if data.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "fitting needs at least 2 states, got {}",
            data.len()
        )));
    }
    let m = data.len() - 1;
    fit_pairs(data.dt(), &data.states()[..m], &data.states()[1..], order, ridge)
}

/// Same objective over arbitrary `(input, output)` pairs taken one step `dt` apart.
pub fn fit_pairs(
    dt: f64,
    inputs: &[Vec<f64>],
    outputs: &[Vec<f64>],
    order: usize,
    ridge: f64,
) -> Result<(PolynomialMap, FitReport)> {
    if inputs.is_empty() {
        return Err(Error::InsufficientData("fitting needs at least one pair".into()));
    }
    if inputs.len() != outputs.len() {
        return Err(Error::DimensionMismatch(format!("{} inputs, {} outputs", inputs.len(), outputs.len())));
    }
    let n = inputs[0].len();
    if inputs.iter().chain(outputs).any(|v| v.len() != n) {
        return Err(Error::DimensionMismatch("all states must share one dimension".into()));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::InvalidArgument(format!("ridge must be non-negative, got {ridge}")));
    }
    let phi = design_rows(n, inputs, order)?;
    let y = DMatrix::from_fn(outputs.len(), n, |i, k| outputs[i][k]);
    let (m, cols) = phi.shape();

    let sv = phi.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = if m >= cols { sv.min() } else { 0.0 };
    let condition_estimate = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let cutoff = smax * f64::EPSILON * m.max(cols) as f64;
    let rank = sv.iter().filter(|&&s| s > cutoff).count();

    let (coef, rank_deficient) = if ridge > 0.0 {
        let mut aug = DMatrix::zeros(m + cols, cols);
        aug.view_mut((0, 0), (m, cols)).copy_from(&phi);
        let s = ridge.sqrt();
        for j in 0..cols {
            aug[(m + j, j)] = s;
        }
        let mut rhs = DMatrix::zeros(m + cols, y.ncols());
        rhs.view_mut((0, 0), (m, y.ncols())).copy_from(&y);
        (qr_solve(aug, &rhs)?, false)
    } else if rank == cols {
        (qr_solve(phi.clone(), &y)?, false)
    } else {
        let svd = phi.clone().svd(true, true);
        let sol = svd
            .solve(&y, cutoff)
            .map_err(|e| Error::InvalidArgument(format!("pseudo-inverse solve failed: {e}")))?;
        (sol, true)
    };

    // coef is N × n; the map wants n × N
    let map = PolynomialMap::from_stacked(order, dt, coef.transpose())?;
    let resid = &y - &phi * &coef;
    let residual_mse = resid.iter().map(|r| r * r).sum::<f64>() / resid.len() as f64;
    let weight_norms = (0..=order).map(|d| map.weight(d).norm()).collect();
    let report = FitReport {
        residual_mse,
        weight_norms,
        condition_estimate,
        ridge,
        rank,
        rank_deficient,
        pairs: m,
    };
    Ok((map, report))
}

fn qr_solve(a: DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let qr = a.qr();
    let qtb = qr.q().transpose() * b;
    qr.r()
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::InvalidArgument("triangular factor is singular".into()))
}

/// Plain gradient descent on the same objective.
#[derive(Clone, Copy, Debug)]
pub struct GradientOptions {
    /// Fixed step; `None` uses `1 / L` with `L` the gradient's Lipschitz bound.
    pub step: Option<f64>,
    pub max_iter: usize,
    /// Stop once the gradient's max-abs entry drops below this.
    pub tol: f64,
}

impl Default for GradientOptions {
    fn default() -> Self {
        GradientOptions { step: None, max_iter: 200_000, tol: 1e-12 }
    }
}

/// Fits by iterating `W ← W − s ∇L` from zero weights. Returns the map and the
/// number of iterations used.
pub fn fit_map_gradient(
    data: &TrajectoryDataset,
    order: usize,
    opts: &GradientOptions,
) -> Result<(PolynomialMap, usize)> {
    if data.len() < 2 {
        return Err(Error::InsufficientData("fitting needs at least 2 states".into()));
    }
    let phi = design_matrix(data, order)?;
    let y = DMatrix::from_fn(data.len() - 1, data.n(), |i, k| data.states()[i + 1][k]);
    let m = phi.nrows() as f64;
    let gram = phi.transpose() * &phi * (2.0 / m);
    let rhs = phi.transpose() * &y * (2.0 / m);
    let step = match opts.step {
        Some(s) => s,
        None => {
            let lmax = gram.clone().symmetric_eigenvalues().max();
            1.0 / lmax
        }
    };
    let mut coef = DMatrix::zeros(phi.ncols(), y.ncols());
    let mut iters = 0;
    while iters < opts.max_iter {
        let grad = &gram * &coef - &rhs;
        iters += 1;
        coef -= &grad * step;
        if grad.amax() < opts.tol {
            break;
        }
        if coef.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("gradient iterate".into()));
        }
    }
    Ok((PolynomialMap::from_stacked(order, data.dt(), coef.transpose())?, iters))
}

/// Prediction from a fitted map: repeated application from `x0`.
pub fn predict(map: &PolynomialMap, x0: &[f64], steps: usize) -> Result<TrajectoryDataset> {
    map.iterate(x0, steps)
}
