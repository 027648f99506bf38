use super::{BurgersConfig, Field};
use crate::error::{Error, Result};
use crate::par::{self, Exec};

/// One explicit step: Euler in time, first-order upwind `u u_x`, centered
/// `ν u_xx`, periodic wrap at both ends.
pub fn fdm_step(u: &[f64], next: &mut [f64], nu: f64, dt: f64, dx: f64, exec: Exec) {
    let nx = u.len();
    let c = dt / dx;
    let d = nu * dt / (dx * dx);
    par::fill(exec, next, |i| {
        let um = u[(i + nx - 1) % nx];
        let up = u[(i + 1) % nx];
        let ui = u[i];
        ui - ui * c * (ui - um) + d * (up - 2.0 * ui + um)
    });
}

/// Runs `cfg.steps()` FDM steps from `u0` on the fixed uniform mesh.
pub fn fdm_simulate(cfg: &BurgersConfig, u0: &[f64], exec: Exec) -> Result<Field> {
    cfg.validate()?;
    if u0.len() != cfg.nx {
        return Err(Error::DimensionMismatch(format!("{} values for {} nodes", u0.len(), cfg.nx)));
    }
    if u0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial field".into()));
    }
    let dx = cfg.dx();
    let mut u = u0.to_vec();
    let mut next = vec![0.0; cfg.nx];
    for step in 1..=cfg.steps() {
        fdm_step(&u, &mut next, cfg.nu, cfg.dt, dx, exec);
        std::mem::swap(&mut u, &mut next);
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { step, last_valid: step - 1 });
        }
    }
    Ok(Field::uniform(u, cfg.steps() as f64 * cfg.dt))
}
