//! Viscous Burgers' equation on the periodic interval `[0, 2π)`.
//!
//! Two propagators are compared against the closed-form sawtooth solution: the
//! explicit upwind finite-difference scheme, and a translation-invariant
//! stencil Lie map that advances node positions along characteristics
//! (`x' = u`) and values by nonuniform-grid diffusion (`u' = ν u_xx`).

mod analytic;
mod bench;
mod fdm;
mod stencil;

use std::f64::consts::PI;
use std::io::Write;

pub use analytic::{analytic_field, analytic_u};
pub use bench::{benchmark, field_mse, BenchRow, BenchmarkReport};
pub use fdm::{fdm_simulate, fdm_step};
pub use stencil::{
    build_stencil_map, simulate_map, stencil_system, step_field, window_dim, MapRun, Poly, StencilMap, WindowLayout,
};

use crate::error::{Error, Result};

pub const PERIOD: f64 = 2.0 * PI;

/// Viscosity, mesh, step and stencil-map parameters.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct BurgersConfig {
    pub nu: f64,
    pub nx: usize,
    pub dt: f64,
    pub t_end: f64,
    pub map_order: usize,
    pub halo: usize,
    pub expansion_order: usize,
}

impl BurgersConfig {
    /// Map defaults: order 3, halo 2, reciprocal expansion order 2.
    pub fn new(nu: f64, nx: usize, dt: f64, t_end: f64) -> Self {
        BurgersConfig { nu, nx, dt, t_end, map_order: 3, halo: 2, expansion_order: 2 }
    }

    pub fn dx(&self) -> f64 {
        PERIOD / self.nx as f64
    }

    /// Number of steps `round(t_end / dt)`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return bad(format!("viscosity must be positive, got {}", self.nu));
        }
        if self.nx < 8 {
            return bad(format!("need at least 8 nodes, got {}", self.nx));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("time step must be positive, got {}", self.dt));
        }
        // t_end = 0 is a valid zero-step run
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("final time must be non-negative, got {}", self.t_end));
        }
        if self.halo < 1 {
            return bad("halo must be at least 1".into());
        }
        if self.map_order < 2 {
            return bad(format!("map order must be at least 2, got {}", self.map_order));
        }
        if self.expansion_order < 1 {
            return bad("expansion order must be at least 1".into());
        }
        Ok(())
    }
}

/// Node positions and values at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub t: f64,
}

impl Field {
    /// Uniform mesh `x_i = i·2π/nx` with the given values.
    pub fn uniform(u: Vec<f64>, t: f64) -> Self {
        let dx = PERIOD / u.len() as f64;
        let x = (0..u.len()).map(|i| i as f64 * dx).collect();
        Field { x, u, t }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Positions reduced into `[0, 2π)`.
    pub fn wrapped_positions(&self) -> Vec<f64> {
        self.x.iter().map(|x| x.rem_euclid(PERIOD)).collect()
    }

    /// Writes the snapshot as `x,u` CSV with wrapped positions.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x", "u"])?;
        for (x, u) in self.wrapped_positions().iter().zip(&self.u) {
            out.write_record([x.to_string(), u.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}
