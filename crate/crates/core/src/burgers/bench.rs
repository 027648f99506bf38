use std::time::Instant;

use serde::Serialize;

use super::{analytic_field, analytic_u, build_stencil_map, fdm_simulate, simulate_map, BurgersConfig, Field};
use crate::error::{Error, Result};
use crate::liemap::BuildOptions;
use crate::par;

/// One method's line of the comparison.
#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub method: String,
    pub time_step: f64,
    /// `"<nodes>x<steps>"`.
    pub mesh: String,
    pub elapsed_seconds: f64,
    /// `None` when the run diverged before the final time.
    pub mse_final: Option<f64>,
    pub nx: usize,
    pub steps: usize,
    pub diverged_at_step: Option<usize>,
    /// Stencil map only: first step with out-of-order nodes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes_crossed_at_step: Option<usize>,
    /// Stencil map only: time to build the map, excluded from `elapsed_seconds`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub build_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map_terms: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchmarkReport {
    pub nu: f64,
    pub t_end: f64,
    pub rows: Vec<BenchRow>,
    pub fdm_config: BurgersConfig,
    pub map_config: BurgersConfig,
    pub parallel: bool,
    pub threads: usize,
    pub timing_note: String,
}

impl BenchmarkReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn row(&self, method: &str) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.method == method)
    }
}

/// Mean squared deviation from the analytic solution at the field's own
/// (wrapped) positions.
pub fn field_mse(field: &Field, nu: f64) -> f64 {
    let pos = field.wrapped_positions();
    let sum: f64 = pos.iter().zip(&field.u).map(|(&x, &u)| (u - analytic_u(field.t, x, nu)).powi(2)).sum();
    sum / field.len() as f64
}

/// Runs FDM with `fdm` and the stencil map with `map` from the analytic
/// initial field and scores both at the shared final time.
pub fn benchmark(fdm: &BurgersConfig, map: &BurgersConfig, opts: &BuildOptions) -> Result<BenchmarkReport> {
    fdm.validate()?;
    map.validate()?;
    if fdm.nu != map.nu || fdm.nx != map.nx {
        return Err(Error::InvalidArgument("both methods need the same viscosity and mesh".into()));
    }
    let t_fdm = fdm.steps() as f64 * fdm.dt;
    let t_map = map.steps() as f64 * map.dt;
    if (t_fdm - t_map).abs() > 1e-9 * t_fdm.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "final times differ: {t_fdm} (FDM) vs {t_map} (map); pick steps that divide t_end"
        )));
    }
    let exec = opts.exec;
    let start = analytic_field(0.0, fdm.nx, fdm.nu);

    let clock = Instant::now();
    let fdm_out = fdm_simulate(fdm, &start.u, exec);
    let fdm_secs = clock.elapsed().as_secs_f64();
    let (mse, diverged) = match fdm_out {
        Ok(f) => (Some(field_mse(&f, fdm.nu)), None),
        Err(Error::Diverged { step, .. }) => (None, Some(step)),
        Err(e) => return Err(e),
    };
    let fdm_row = BenchRow {
        method: "FDM".into(),
        time_step: fdm.dt,
        mesh: format!("{}x{}", fdm.nx, fdm.steps()),
        elapsed_seconds: fdm_secs,
        mse_final: mse,
        nx: fdm.nx,
        steps: fdm.steps(),
        diverged_at_step: diverged,
        nodes_crossed_at_step: None,
        build_seconds: None,
        map_terms: None,
    };

    let clock = Instant::now();
    let stencil = build_stencil_map(map, opts)?;
    let build_secs = clock.elapsed().as_secs_f64();
    let clock = Instant::now();
    let run = simulate_map(&stencil, &start, map.steps(), exec)?;
    let map_secs = clock.elapsed().as_secs_f64();
    let diverged = match run.diverged {
        Some(Error::Diverged { step, .. }) => Some(step),
        _ => None,
    };
    let map_row = BenchRow {
        method: "Lie map".into(),
        time_step: map.dt,
        mesh: format!("{}x{}", map.nx, map.steps()),
        elapsed_seconds: map_secs,
        mse_final: diverged.is_none().then(|| field_mse(&run.field, map.nu)),
        nx: map.nx,
        steps: map.steps(),
        diverged_at_step: diverged,
        nodes_crossed_at_step: run.crossed_at_step,
        build_seconds: Some(build_secs),
        map_terms: Some(stencil.nonzero_terms()),
    };

    let threads = par::threads(exec);
    Ok(BenchmarkReport {
        nu: fdm.nu,
        t_end: t_fdm,
        rows: vec![fdm_row, map_row],
        fdm_config: fdm.clone(),
        map_config: map.clone(),
        parallel: exec.is_parallel(),
        threads,
        timing_note: format!(
            "wall-clock of the time loop on {threads} thread(s); map construction reported separately"
        ),
    })
}
