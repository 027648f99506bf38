//! Van der Pol benchmark: system definition, fixed-step RK4 reference and the
//! error metrics used to score Lie-map trajectories.

use crate::error::{Error, Result};
use crate::liemap::{build_map, BuildOptions, PolynomialSystem, Term};
use crate::par::{self, Exec};
use crate::trajectory::TrajectoryDataset;

/// Autonomous right-hand side `ẋ = F(x)`.
pub trait RhsFunction: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64], out: &mut [f64]);
}

impl RhsFunction for PolynomialSystem {
    fn dim(&self) -> usize {
        self.n()
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        PolynomialSystem::eval(self, x, out)
    }
}

/// Adapts a closure into an [`RhsFunction`].
pub struct FnRhs<F> {
    n: usize,
    f: F,
}

impl<F> FnRhs<F>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        FnRhs { n, f }
    }
}

impl<F> RhsFunction for FnRhs<F>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        (self.f)(x, out)
    }
}

/// `x' = y`, `y' = y − x − x²y`.
pub fn vdp_system() -> PolynomialSystem {
    let terms = [
        Term { target: 0, exponents: vec![0, 1], coeff: 1.0 },
        Term { target: 1, exponents: vec![1, 0], coeff: -1.0 },
        Term { target: 1, exponents: vec![0, 1], coeff: 1.0 },
        Term { target: 1, exponents: vec![2, 1], coeff: -1.0 },
    ];
    PolynomialSystem::from_terms(2, &terms).expect("static system is well formed")
}

/// The same vector field written out by hand.
pub fn vdp_rhs(x: &[f64], out: &mut [f64]) {
    out[0] = x[1];
    out[1] = x[1] - x[0] - x[0] * x[0] * x[1];
}

/// Initial conditions of the Van der Pol benchmark runs.
pub const VDP_ICS: [[f64; 2]; 4] = [[-2.0, 4.0], [1.0, 2.0], [2.0, -2.0], [-3.0, -3.0]];

/// Classical RK4 with fixed step `h` over `[0, t_end]`, sampled every step.
pub fn rk4_solve(rhs: &dyn RhsFunction, x0: &[f64], t_end: f64, h: f64) -> Result<TrajectoryDataset> {
    rk4_solve_sampled(rhs, x0, t_end, h, 1)
}

fn whole_steps(span: f64, h: f64, what: &str) -> Result<usize> {
    let ratio = span / h;
    let steps = ratio.round();
    if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::InvalidArgument(format!("{what} {span} is not a whole multiple of {h}")));
    }
    Ok(steps as usize)
}

/// RK4 with step `h`, keeping every `every`-th state (sample spacing `every·h`).
pub fn rk4_solve_sampled(
    rhs: &dyn RhsFunction,
    x0: &[f64],
    t_end: f64,
    h: f64,
    every: usize,
) -> Result<TrajectoryDataset> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    if !(t_end >= h) {
        return Err(Error::InvalidArgument(format!("horizon {t_end} shorter than step {h}")));
    }
    if every == 0 {
        return Err(Error::InvalidArgument("sampling stride must be at least 1".into()));
    }
    let n = rhs.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch(format!("initial state has {} components, system has {n}", x0.len())));
    }
    let steps = whole_steps(t_end, h, "horizon")?;
    if steps % every != 0 {
        return Err(Error::InvalidArgument(format!("{steps} steps not divisible by stride {every}")));
    }

    let mut x = x0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut states = Vec::with_capacity(steps / every + 1);
    states.push(x.clone());
    for step in 1..=steps {
        rhs.eval(&x, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        rhs.eval(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        rhs.eval(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        rhs.eval(&tmp, &mut k4);
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { step, last_valid: step - 1 });
        }
        if step % every == 0 {
            states.push(x.clone());
        }
    }
    TrajectoryDataset::new(0.0, h * every as f64, states)
}

/// Mean over samples `i ≥ 1` of `‖pred_i − ref_i‖₂ / ‖ref_i‖₂`.
pub fn mean_relative_error(pred: &TrajectoryDataset, reference: &TrajectoryDataset) -> Result<f64> {
    if pred.len() != reference.len() || pred.n() != reference.n() {
        return Err(Error::DimensionMismatch(format!(
            "trajectories have {}x{} and {}x{} samples",
            pred.len(),
            pred.n(),
            reference.len(),
            reference.n()
        )));
    }
    if (pred.dt() - reference.dt()).abs() > 1e-9 * reference.dt() {
        return Err(Error::DimensionMismatch(format!(
            "time steps differ: {} vs {}",
            pred.dt(),
            reference.dt()
        )));
    }
    if pred.len() < 2 {
        return Err(Error::InsufficientData("need at least one sample after the initial state".into()));
    }
    let mut total = 0.0;
    for (i, (p, r)) in pred.states().iter().zip(reference.states()).enumerate().skip(1) {
        let rn = norm2(r);
        if rn == 0.0 {
            return Err(Error::InvalidArgument(format!("reference sample {i} has zero norm")));
        }
        let dn = norm2(&p.iter().zip(r).map(|(a, b)| a - b).collect::<Vec<_>>());
        total += dn / rn;
    }
    Ok(total / (pred.len() - 1) as f64)
}

/// Uniform average of [`mean_relative_error`] over paired trajectories.
pub fn mean_relative_error_many(preds: &[TrajectoryDataset], refs: &[TrajectoryDataset]) -> Result<f64> {
    if preds.len() != refs.len() || preds.is_empty() {
        return Err(Error::DimensionMismatch("prediction and reference sets differ in size".into()));
    }
    let mut sum = 0.0;
    for (p, r) in preds.iter().zip(refs) {
        sum += mean_relative_error(p, r)?;
    }
    Ok(sum / preds.len() as f64)
}

/// Mean of squared differences.
pub fn mse(pred: &[f64], reference: &[f64]) -> Result<f64> {
    if pred.len() != reference.len() {
        return Err(Error::DimensionMismatch(format!("lengths {} and {}", pred.len(), reference.len())));
    }
    if pred.is_empty() {
        return Ok(0.0);
    }
    Ok(pred.iter().zip(reference).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / pred.len() as f64)
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Settings of the Van der Pol order sweep.
#[derive(Clone, Debug)]
pub struct VdpSweep {
    pub dt: f64,
    pub t_end: f64,
    pub reference_step: f64,
    pub ics: Vec<Vec<f64>>,
}

impl Default for VdpSweep {
    fn default() -> Self {
        VdpSweep {
            dt: 0.01,
            t_end: 10.0,
            reference_step: 1e-4,
            ics: VDP_ICS.iter().map(|ic| ic.to_vec()).collect(),
        }
    }
}

/// Error of one map order in the sweep.
#[derive(Clone, Debug, serde::Serialize)]
pub struct OrderError {
    pub order: usize,
    pub mean_relative_error: f64,
    /// Per initial condition, same order as `VdpSweep::ics`.
    pub per_ic: Vec<f64>,
}

impl VdpSweep {
    /// RK4 references sampled at `dt`, one per initial condition.
    pub fn references(&self, exec: Exec) -> Result<Vec<TrajectoryDataset>> {
        let every = whole_steps(self.dt, self.reference_step, "sample step")?;
        let sys = vdp_system();
        par::map(exec, &self.ics, |ic| {
            rk4_solve_sampled(&sys, ic, self.t_end, self.reference_step, every)
        })
        .into_iter()
        .collect()
    }

    /// Mean relative error of Lie-map trajectories for each order.
    pub fn run(&self, orders: &[usize], opts: &BuildOptions, refs: &[TrajectoryDataset]) -> Result<Vec<OrderError>> {
        let steps = whole_steps(self.t_end, self.dt, "horizon")?;
        let sys = vdp_system();
        orders
            .iter()
            .map(|&order| {
                let map = build_map(&sys, self.dt, order, opts)?;
                let preds = map.iterate_many(&self.ics, steps, opts.exec)?;
                let per_ic = preds
                    .iter()
                    .zip(refs)
                    .map(|(p, r)| mean_relative_error(p, r))
                    .collect::<Result<Vec<_>>>()?;
                let mean = per_ic.iter().sum::<f64>() / per_ic.len() as f64;
                Ok(OrderError { order, mean_relative_error: mean, per_ic })
            })
            .collect()
    }
}
