//! Stencil map on a moving grid.
//!
//! Each node carries its position and value. For a window of `2r + 1` nodes
//! centered on node 0 the local state is the spacing perturbations
//! `s_j = x_{j+1} − x_j − dx` (`j = −r … r−1`) and the values `u_{−r} … u_r`.
//! Positions move along characteristics, so `s_j' = u_{j+1} − u_j`, and values
//! diffuse with the three-point second derivative on the nonuniform grid
//!
//! ```text
//! u_j' = (2ν/dx²) [ u_{j−1} / ((1+a)(2+a+b)) − u_j / ((1+a)(1+b)) + u_{j+1} / ((1+b)(2+a+b)) ]
//! ```
//!
//! with `a = s_{j−1}/dx`, `b = s_j/dx`. The reciprocals are Taylor-expanded in
//! the spacings. Edge values `u_{±r}` are held fixed over the step. One extra
//! variable `ξ' = u_0` accumulates the center position shift so the map can
//! return both the new position and the new value of node 0.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::{BurgersConfig, Field, PERIOD};
use crate::error::{Error, Result};
use crate::liemap::{build_map, BuildOptions, PolynomialSystem, Term};
use crate::par::{self, Exec};
use crate::polybasis::{MultiIndex, StackedBasis};

/// Sparse polynomial keyed by exponent vectors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// `c · x_i`.
    pub fn var(nvars: usize, i: usize, c: f64) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Poly::zero(nvars);
        p.add_term(e, c);
        p
    }

    pub fn add_term(&mut self, exponents: Vec<u32>, c: f64) {
        debug_assert_eq!(exponents.len(), self.nvars);
        match self.terms.entry(exponents) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                if c != 0.0 {
                    v.insert(c);
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|e| e.iter().sum::<u32>() as usize).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.add_term(e.to_vec(), c);
        }
        out
    }

    pub fn scale(&self, c: f64) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, v) in self.terms() {
            out.add_term(e.to_vec(), v * c);
        }
        out
    }

    /// Product with every term above total degree `max_deg` dropped.
    pub fn mul_trunc(&self, other: &Poly, max_deg: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (ea, ca) in self.terms() {
            let da: u32 = ea.iter().sum();
            for (eb, cb) in other.terms() {
                if (da + eb.iter().sum::<u32>()) as usize > max_deg {
                    continue;
                }
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// `1 / (c + p)` for `p` without a constant term, to degree `order`.
    pub fn reciprocal(c: f64, p: &Poly, order: usize) -> Poly {
        let ratio = p.scale(-1.0 / c);
        let mut power = Poly::constant(p.nvars, 1.0);
        let mut sum = power.clone();
        for _ in 0..order {
            power = power.mul_trunc(&ratio, order);
            sum = sum.add(&power);
        }
        sum.scale(1.0 / c)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms().map(|(e, c)| c * MultiIndex::new(e.to_vec()).eval(x)).sum()
    }
}

/// Variable positions inside the window state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowLayout {
    pub halo: usize,
}

impl WindowLayout {
    pub fn dim(&self) -> usize {
        window_dim(self.halo)
    }

    /// Index of `s_j`, `−r ≤ j ≤ r − 1`.
    pub fn s(&self, j: isize) -> usize {
        let r = self.halo as isize;
        debug_assert!(-r <= j && j < r);
        (j + r) as usize
    }

    /// Index of `u_j`, `−r ≤ j ≤ r`.
    pub fn u(&self, j: isize) -> usize {
        let r = self.halo as isize;
        debug_assert!(-r <= j && j <= r);
        (3 * r + j) as usize
    }
}

/// `4r + 1`: `2r` spacings and `2r + 1` values.
pub fn window_dim(halo: usize) -> usize {
    4 * halo + 1
}

/// Right-hand side of the window dynamics, expanded to order
/// `cfg.expansion_order` in the spacings and truncated to total degree
/// `cfg.map_order`.
pub fn stencil_system(cfg: &BurgersConfig) -> Result<PolynomialSystem> {
    cfg.validate()?;
    let lay = WindowLayout { halo: cfg.halo };
    let n = lay.dim();
    let r = cfg.halo as isize;
    let dx = cfg.dx();
    let q = cfg.expansion_order;
    let mut terms = Vec::new();
    let mut push = |target: usize, p: &Poly| {
        for (e, c) in p.terms() {
            terms.push(Term { target, exponents: e.to_vec(), coeff: c });
        }
    };

    for j in -r..r {
        let p = Poly::var(n, lay.u(j + 1), 1.0).add(&Poly::var(n, lay.u(j), -1.0));
        push(lay.s(j), &p);
    }

    let scale = 2.0 * cfg.nu / (dx * dx);
    for j in (-r + 1)..r {
        let a = Poly::var(n, lay.s(j - 1), 1.0 / dx);
        let b = Poly::var(n, lay.s(j), 1.0 / dx);
        let ra = Poly::reciprocal(1.0, &a, q);
        let rb = Poly::reciprocal(1.0, &b, q);
        let rab = Poly::reciprocal(2.0, &a.add(&b), q);
        let left = ra.mul_trunc(&rab, q);
        let mid = ra.mul_trunc(&rb, q).scale(-1.0);
        let right = rb.mul_trunc(&rab, q);
        let k = cfg.map_order;
        let rhs = left
            .mul_trunc(&Poly::var(n, lay.u(j - 1), 1.0), k)
            .add(&mid.mul_trunc(&Poly::var(n, lay.u(j), 1.0), k))
            .add(&right.mul_trunc(&Poly::var(n, lay.u(j + 1), 1.0), k))
            .scale(scale);
        push(lay.u(j), &rhs);
    }
    PolynomialSystem::from_terms(n, &terms)
}

/// The window system plus a trailing variable `ξ` with `ξ' = u_0`.
fn with_center_shift(sys: &PolynomialSystem, lay: WindowLayout) -> Result<PolynomialSystem> {
    let n = sys.n();
    let mut terms: Vec<Term> = sys
        .terms()
        .into_iter()
        .map(|mut t| {
            t.exponents.push(0);
            t
        })
        .collect();
    let mut e = vec![0; n + 1];
    e[lay.u(0)] = 1;
    terms.push(Term { target: n, exponents: e, coeff: 1.0 });
    PolynomialSystem::from_terms(n + 1, &terms)
}

/// Center-node rows of the window map: position shift and new value.
#[derive(Clone, Debug)]
pub struct StencilMap {
    layout: WindowLayout,
    dt: f64,
    dx: f64,
    basis: StackedBasis,
    // 2 × N over the window basis: row 0 the shift of x_0, row 1 the new u_0
    weights: DMatrix<f64>,
    // monomials actually needed, in evaluation order: (slot of parent, variable)
    plan: Vec<(usize, usize)>,
    shift_w: Vec<f64>,
    value_w: Vec<f64>,
}

/// Builds the truncated map of the window system over one step `cfg.dt`.
pub fn build_stencil_map(cfg: &BurgersConfig, opts: &BuildOptions) -> Result<StencilMap> {
    let lay = WindowLayout { halo: cfg.halo };
    let sys = stencil_system(cfg)?;
    let aug = with_center_shift(&sys, lay)?;
    let n = sys.n();
    let full = build_map(&aug, cfg.dt, cfg.map_order, opts)?;
    let basis = StackedBasis::new(n, cfg.map_order)?;

    let mut weights = DMatrix::zeros(2, basis.len());
    for (g, _, alpha) in full.basis().iter() {
        let e = alpha.exponents();
        // ξ starts every step at zero, so columns carrying it never contribute
        if e[n] > 0 {
            continue;
        }
        let j = basis.index_of(&MultiIndex::new(e[..n].to_vec()))?;
        weights[(0, j)] = full.stacked_weights()[(n, g)];
        weights[(1, j)] = full.stacked_weights()[(lay.u(0), g)];
    }
    if weights.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("stencil map weights".into()));
    }
    Ok(StencilMap::from_weights(lay, cfg.dt, cfg.dx(), basis, weights))
}

impl StencilMap {
    fn from_weights(layout: WindowLayout, dt: f64, dx: f64, basis: StackedBasis, weights: DMatrix<f64>) -> Self {
        let len = basis.len();
        let mut needed = vec![false; len];
        needed[0] = true;
        for i in (1..len).rev() {
            if needed[i] || weights[(0, i)] != 0.0 || weights[(1, i)] != 0.0 {
                needed[i] = true;
                needed[basis.parent(i).unwrap().0] = true;
            }
        }
        let mut slot = vec![usize::MAX; len];
        let mut plan = Vec::new();
        let mut shift_w = Vec::new();
        let mut value_w = Vec::new();
        for i in 0..len {
            if !needed[i] {
                continue;
            }
            slot[i] = plan.len();
            plan.push(basis.parent(i).map(|(p, m)| (slot[p], m)).unwrap_or((0, 0)));
            shift_w.push(weights[(0, i)]);
            value_w.push(weights[(1, i)]);
        }
        StencilMap { layout, dt, dx, basis, weights, plan, shift_w, value_w }
    }

    pub fn layout(&self) -> WindowLayout {
        self.layout
    }

    pub fn halo(&self) -> usize {
        self.layout.halo
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn basis(&self) -> &StackedBasis {
        &self.basis
    }

    /// `2 × N` weights: center shift row, then center value row.
    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// Number of monomials with a nonzero weight in either row.
    pub fn nonzero_terms(&self) -> usize {
        (0..self.weights.ncols())
            .filter(|&j| self.weights[(0, j)] != 0.0 || self.weights[(1, j)] != 0.0)
            .count()
    }

    /// `(Δx_0, u_0)` after one step from the window state.
    pub fn apply_window(&self, w: &[f64], scratch: &mut Vec<f64>) -> (f64, f64) {
        debug_assert_eq!(w.len(), self.layout.dim());
        scratch.clear();
        scratch.push(1.0);
        let (mut shift, mut value) = (self.shift_w[0], self.value_w[0]);
        for (k, &(p, m)) in self.plan.iter().enumerate().skip(1) {
            let z = scratch[p] * w[m];
            scratch.push(z);
            shift += self.shift_w[k] * z;
            value += self.value_w[k] * z;
        }
        (shift, value)
    }
}

/// One simultaneous update of every node from the old field.
pub fn step_field(map: &StencilMap, field: &Field, exec: Exec) -> Result<Field> {
    let nx = field.len();
    let r = map.halo();
    if nx < 2 * r + 1 {
        return Err(Error::DimensionMismatch(format!("{nx} nodes cannot hold a window of {}", 2 * r + 1)));
    }
    let dx = map.dx();
    let s: Vec<f64> = (0..nx)
        .map(|k| {
            let next = if k + 1 == nx { field.x[0] + PERIOD } else { field.x[k + 1] };
            next - field.x[k] - dx
        })
        .collect();
    let lay = map.layout();
    let mut out = vec![0.0; 2 * nx];
    par::fill_chunks(exec, &mut out, 2, |i, o| {
        let mut w = vec![0.0; lay.dim()];
        let ri = r as isize;
        for j in -ri..ri {
            w[lay.s(j)] = s[wrap(i, j, nx)];
        }
        for j in -ri..=ri {
            w[lay.u(j)] = field.u[wrap(i, j, nx)];
        }
        let mut scratch = Vec::with_capacity(map.plan.len());
        let (shift, value) = map.apply_window(&w, &mut scratch);
        o[0] = field.x[i] + shift;
        o[1] = value;
    });
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("stencil step".into()));
    }
    let (x, u) = out.chunks(2).map(|c| (c[0], c[1])).unzip();
    Ok(Field { x, u, t: field.t + map.dt() })
}

fn wrap(i: usize, j: isize, nx: usize) -> usize {
    (i as isize + j).rem_euclid(nx as isize) as usize
}

/// Outcome of repeated stencil steps.
#[derive(Debug)]
pub struct MapRun {
    /// Last finite field.
    pub field: Field,
    pub diverged: Option<Error>,
    /// First step after which some node overtook its right neighbour.
    pub crossed_at_step: Option<usize>,
}

/// Applies `steps` stencil steps, stopping at the first non-finite field.
pub fn simulate_map(map: &StencilMap, start: &Field, steps: usize, exec: Exec) -> Result<MapRun> {
    let mut field = start.clone();
    let mut crossed_at_step = None;
    for step in 1..=steps {
        match step_field(map, &field, exec) {
            Ok(next) => field = next,
            Err(Error::NonFinite(_)) => {
                return Ok(MapRun {
                    field,
                    diverged: Some(Error::Diverged { step, last_valid: step - 1 }),
                    crossed_at_step,
                })
            }
            Err(e) => return Err(e),
        }
        if crossed_at_step.is_none() && is_tangled(&field) {
            crossed_at_step = Some(step);
        }
    }
    Ok(MapRun { field, diverged: None, crossed_at_step })
}

fn is_tangled(f: &Field) -> bool {
    let n = f.len();
    f.x.windows(2).any(|w| w[1] <= w[0]) || f.x[0] + PERIOD <= f.x[n - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> BurgersConfig {
        BurgersConfig::new(0.07, 100, 1e-3, 0.1)
    }

    #[test]
    fn reciprocal_series() {
        let p = Poly::var(1, 0, 1.0);
        let r = Poly::reciprocal(2.0, &p, 3);
        // 1/(2+x) = 1/2 − x/4 + x²/8 − x³/16
        for (x, want) in [(0.1_f64, 1.0 / 2.1), (-0.05, 1.0 / 1.95)] {
            assert!((r.eval(&[x]) - want).abs() < x.powi(4));
        }
        assert_eq!(r.len(), 4);
    }

    #[test]
    fn cancellation_removes_term() {
        let p = Poly::var(2, 1, 3.0).add(&Poly::var(2, 1, -3.0));
        assert!(p.is_empty());
    }

    #[test]
    fn layout_indices() {
        let lay = WindowLayout { halo: 2 };
        assert_eq!(lay.dim(), 9);
        assert_eq!((lay.s(-2), lay.s(1)), (0, 3));
        assert_eq!((lay.u(-2), lay.u(0), lay.u(2)), (4, 6, 8));
    }

    #[test]
    fn uniform_grid_rhs_is_standard_laplacian() {
        let c = cfg();
        let sys = stencil_system(&c).unwrap();
        let lay = WindowLayout { halo: 2 };
        let mut w = vec![0.0; 9];
        for j in -2..=2isize {
            w[lay.u(j)] = (j as f64 * 0.3).sin();
        }
        let mut out = vec![0.0; 9];
        sys.eval(&w, &mut out);
        let dx = c.dx();
        let lap = |j: isize| c.nu * (w[lay.u(j - 1)] - 2.0 * w[lay.u(j)] + w[lay.u(j + 1)]) / (dx * dx);
        assert!((out[lay.u(0)] - lap(0)).abs() < 1e-9);
        assert!((out[lay.u(1)] - lap(1)).abs() < 1e-9);
        assert_eq!(out[lay.u(2)], 0.0);
        assert!((out[lay.s(0)] - (w[lay.u(1)] - w[lay.u(0)])).abs() < 1e-15);
    }

    #[test]
    fn constant_state_is_translated() {
        let c = cfg();
        let map = build_stencil_map(&c, &BuildOptions::default()).unwrap();
        let f = Field::uniform(vec![1.5; 100], 0.0);
        let g = step_field(&map, &f, Exec::Sequential).unwrap();
        for i in 0..100 {
            assert!((g.u[i] - 1.5).abs() < 1e-12);
            assert!((g.x[i] - f.x[i] - 1.5 * c.dt).abs() < 1e-12);
        }
        assert!(map.nonzero_terms() > 2);
    }
}
