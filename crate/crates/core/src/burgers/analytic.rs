use super::{Field, PERIOD};

/// Sawtooth solution `u = −2ν φ_x / φ + 4` with
/// `φ = exp(−(x−4t)²/(4ν(t+1))) + exp(−(x−4t−2π)²/(4ν(t+1)))`.
///
/// With `a, b` the two exponents, `−2ν φ_x/φ` reduces to
/// `[e^a (x−4t) + e^b (x−4t−2π)] / ((t+1)(e^a + e^b))`; the larger exponent is
/// factored out so neither Gaussian underflows the ratio.
pub fn analytic_u(t: f64, x: f64, nu: f64) -> f64 {
    let p = x - 4.0 * t;
    let q = p - PERIOD;
    let denom = 4.0 * nu * (t + 1.0);
    let a = -p * p / denom;
    let b = -q * q / denom;
    let top = a.max(b);
    let wa = (a - top).exp();
    let wb = (b - top).exp();
    4.0 + (wa * p + wb * q) / ((t + 1.0) * (wa + wb))
}

/// The analytic solution sampled on the uniform `nx`-node mesh.
pub fn analytic_field(t: f64, nx: usize, nu: f64) -> Field {
    let mut f = Field::uniform(vec![0.0; nx], t);
    for (u, &x) in f.u.iter_mut().zip(&f.x) {
        *u = analytic_u(t, x, nu);
    }
    f
}
