use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::expm::expm;
use super::generator::generator;
use super::system::PolynomialSystem;
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::polybasis::StackedBasis;
use crate::trajectory::TrajectoryDataset;

pub const BASIS_TAG: &str = "grlex-desc";

/// How `dM/dt = D·M, M(0) = I` is integrated over one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Backend {
    /// Scaling-and-squaring Taylor exponential of `D·dt`.
    Exponential { tol: f64 },
    /// Classical RK4 with `substeps` equal steps.
    Rk4 { substeps: usize },
    /// Forward Euler with `substeps` equal steps. Only first-order accurate;
    /// kept to reproduce reference weight tables built this way.
    Euler { substeps: usize },
}

impl Default for Backend {
    fn default() -> Self {
        Backend::Exponential { tol: 1e-13 }
    }
}

impl Backend {
    pub fn rk4() -> Self {
        Backend::Rk4 { substeps: 16 }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct BuildOptions {
    pub backend: Backend,
    pub exec: Exec,
}

impl BuildOptions {
    pub fn with_backend(backend: Backend) -> Self {
        BuildOptions { backend, ..Default::default() }
    }
}

/// The full stacked propagator `M(dt)` over `StackedBasis(n, order)`.
pub fn propagator(
    sys: &PolynomialSystem,
    dt: f64,
    order: usize,
    opts: &BuildOptions,
) -> Result<(StackedBasis, DMatrix<f64>)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if order < 1 {
        return Err(Error::InvalidArgument("map order must be at least 1".into()));
    }
    let gen = generator(sys, order)?;
    let d = gen.matrix();
    let size = d.nrows();
    let m = match opts.backend {
        Backend::Exponential { tol } => expm(&(d * dt), tol)?,
        Backend::Rk4 { substeps } | Backend::Euler { substeps } => {
            if substeps == 0 {
                return Err(Error::InvalidArgument("substeps must be at least 1".into()));
            }
            let h = dt / substeps as f64;
            let rk4 = matches!(opts.backend, Backend::Rk4 { .. });
            let mut data = vec![0.0; size * size];
            // column-major: column c of M(t) evolves independently from e_c
            par::fill_chunks(opts.exec, &mut data, size, |c, col| {
                let mut v = DVector::zeros(size);
                v[c] = 1.0;
                for _ in 0..substeps {
                    v = if rk4 {
                        let k1 = d * &v;
                        let k2 = d * (&v + &k1 * (h / 2.0));
                        let k3 = d * (&v + &k2 * (h / 2.0));
                        let k4 = d * (&v + &k3 * h);
                        &v + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
                    } else {
                        &v + (d * &v) * h
                    };
                }
                col.copy_from_slice(v.as_slice());
            });
            let m = DMatrix::from_vec(size, size, data);
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("integrated propagator".into()));
            }
            m
        }
    };
    Ok((gen.basis().clone(), m))
}

/// Truncated Lie map of `sys` over one step `dt`, up to monomial degree `order`.
pub fn build_map(
    sys: &PolynomialSystem,
    dt: f64,
    order: usize,
    opts: &BuildOptions,
) -> Result<PolynomialMap> {
    let (basis, m) = propagator(sys, dt, order, opts)?;
    let n = sys.n();
    let rows = m.rows(basis.offset(1), n).into_owned();
    PolynomialMap::from_stacked(order, dt, rows)
}

/// One-step propagator `Y = Σ_d W_d X^{[d]}`.
#[derive(Clone, Debug)]
pub struct PolynomialMap {
    order: usize,
    dt: f64,
    basis: StackedBasis,
    // n × N, all degree blocks side by side
    weights: DMatrix<f64>,
}

impl PartialEq for PolynomialMap {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.dt == other.dt && self.weights == other.weights
    }
}

impl PolynomialMap {
    /// From an `n × N` weight matrix over the stacked basis.
    pub fn from_stacked(order: usize, dt: f64, weights: DMatrix<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        let n = weights.nrows();
        let basis = StackedBasis::new(n, order)?;
        if weights.ncols() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "weights have {} columns, stacked basis of order {order} has {}",
                weights.ncols(),
                basis.len()
            )));
        }
        if weights.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("map weights".into()));
        }
        Ok(PolynomialMap { order, dt, basis, weights })
    }

    /// From per-degree blocks `W_0..W_K`.
    pub fn from_blocks(dt: f64, blocks: &[DMatrix<f64>]) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return Err(Error::InvalidArgument("at least W_0 is required".into()));
        };
        let n = first.nrows();
        let order = blocks.len() - 1;
        let basis = StackedBasis::new(n, order)?;
        let mut w = DMatrix::zeros(n, basis.len());
        for (d, b) in blocks.iter().enumerate() {
            let cols = basis.block(d).len();
            if b.nrows() != n || b.ncols() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "W_{d} is {}x{}, expected {n}x{cols}",
                    b.nrows(),
                    b.ncols()
                )));
            }
            w.view_mut((0, basis.offset(d)), (n, cols)).copy_from(b);
        }
        Self::from_stacked(order, dt, w)
    }

    pub fn identity(n: usize, order: usize, dt: f64) -> Result<Self> {
        let basis = StackedBasis::new(n, order)?;
        let mut w = DMatrix::zeros(n, basis.len());
        for m in 0..n {
            w[(m, 1 + m)] = 1.0;
        }
        Self::from_stacked(order, dt, w)
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn basis(&self) -> &StackedBasis {
        &self.basis
    }

    /// `W_d` as an owned `n × basis_dim(n, d)` matrix.
    pub fn weight(&self, d: usize) -> DMatrix<f64> {
        let (c0, c1) = (self.basis.offset(d), self.basis.offset(d + 1));
        self.weights.columns(c0, c1 - c0).into_owned()
    }

    pub fn stacked_weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// `Y = M ∘ X` without allocation; `scratch` holds `N` monomials.
    pub fn apply_into(&self, x: &[f64], scratch: &mut [f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "state has {} components, map expects {}",
                x.len(),
                self.n()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("map input".into()));
        }
        self.basis.eval_into(x, scratch);
        for (m, o) in out.iter_mut().enumerate() {
            *o = self.weights.row(m).iter().zip(scratch.iter()).map(|(w, z)| w * z).sum();
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("map output".into()));
        }
        Ok(())
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut scratch = vec![0.0; self.basis.len()];
        let mut out = vec![0.0; self.n()];
        self.apply_into(x, &mut scratch, &mut out)?;
        Ok(out)
    }

    /// Applies the map to many states; output order matches input order.
    pub fn apply_batch(&self, states: &[Vec<f64>], exec: Exec) -> Result<Vec<Vec<f64>>> {
        par::map(exec, states, |x| self.apply(x)).into_iter().collect()
    }

    /// Repeated application from `x0`, stopping at the first non-finite state.
    ///
    /// Returns the finite prefix and, on divergence, the error.
    pub fn iterate_partial(&self, x0: &[f64], steps: usize) -> Result<(TrajectoryDataset, Option<Error>)> {
        let mut states = Vec::with_capacity(steps + 1);
        if x0.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "initial state has {} components, map expects {}",
                x0.len(),
                self.n()
            )));
        }
        states.push(x0.to_vec());
        let mut scratch = vec![0.0; self.basis.len()];
        let mut next = vec![0.0; self.n()];
        let mut failure = None;
        for step in 1..=steps {
            let prev = states.last().expect("seeded with x0");
            match self.apply_into(prev, &mut scratch, &mut next) {
                Ok(()) => states.push(next.clone()),
                Err(Error::NonFinite(_)) => {
                    failure = Some(Error::Diverged { step, last_valid: step - 1 });
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        Ok((TrajectoryDataset::new(0.0, self.dt, states)?, failure))
    }

    /// `steps + 1` states starting at `x0`, spaced by `dt`.
    pub fn iterate(&self, x0: &[f64], steps: usize) -> Result<TrajectoryDataset> {
        match self.iterate_partial(x0, steps)? {
            (tr, None) => Ok(tr),
            (_, Some(e)) => Err(e),
        }
    }

    /// Independent trajectories from several initial states.
    pub fn iterate_many(&self, x0s: &[Vec<f64>], steps: usize, exec: Exec) -> Result<Vec<TrajectoryDataset>> {
        par::map(exec, x0s, |x0| self.iterate(x0, steps)).into_iter().collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let n = self.n();
        let weights = (0..=self.order)
            .map(|d| {
                let w = self.weight(d);
                let mut data = Vec::with_capacity(w.len());
                for r in 0..w.nrows() {
                    data.extend(w.row(r).iter().copied());
                }
                WeightBlock { degree: d, rows: n, cols: w.ncols(), data }
            })
            .collect();
        let file = MapFile { n, order: self.order, dt: self.dt, basis: BASIS_TAG.into(), weights };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: MapFile = serde_json::from_str(s)?;
        if f.basis != BASIS_TAG {
            return Err(Error::Parse(format!("unsupported basis {:?}, expected {BASIS_TAG:?}", f.basis)));
        }
        if f.n == 0 {
            return Err(Error::Parse("\"n\" must be at least 1".into()));
        }
        let mut blocks: Vec<Option<DMatrix<f64>>> = vec![None; f.order + 1];
        for (k, b) in f.weights.iter().enumerate() {
            if b.degree > f.order {
                return Err(Error::Parse(format!("weights[{k}]: degree {} exceeds order", b.degree)));
            }
            if b.rows != f.n || b.rows * b.cols != b.data.len() {
                return Err(Error::Parse(format!(
                    "weights[{k}]: {}x{} block with {} values",
                    b.rows,
                    b.cols,
                    b.data.len()
                )));
            }
            if blocks[b.degree].is_some() {
                return Err(Error::Parse(format!("weights[{k}]: duplicate degree {}", b.degree)));
            }
            blocks[b.degree] = Some(DMatrix::from_row_slice(b.rows, b.cols, &b.data));
        }
        let blocks = blocks
            .into_iter()
            .enumerate()
            .map(|(d, b)| b.ok_or_else(|| Error::Parse(format!("missing weights for degree {d}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_blocks(f.dt, &blocks).map_err(|e| match e {
            Error::DimensionMismatch(m) => Error::Parse(m),
            other => other,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightBlock {
    degree: usize,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    n: usize,
    order: usize,
    dt: f64,
    basis: String,
    weights: Vec<WeightBlock>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odebench::vdp_system;

    #[test]
    fn identity_flow() {
        let sys = PolynomialSystem::zero(2).unwrap();
        for backend in [Backend::default(), Backend::rk4(), Backend::Euler { substeps: 3 }] {
            let map = build_map(&sys, 0.3, 3, &BuildOptions::with_backend(backend)).unwrap();
            assert_eq!(map, PolynomialMap::identity(2, 3, 0.3).unwrap());
        }
        let map = PolynomialMap::identity(2, 2, 1.0).unwrap();
        assert_eq!(map.apply(&[0.7, -2.0]).unwrap(), vec![0.7, -2.0]);
    }

    #[test]
    fn decay_and_rotation_closed_forms() {
        let decay = PolynomialSystem::linear(&DMatrix::from_element(1, 1, -1.0)).unwrap();
        let map = build_map(&decay, 0.01, 3, &BuildOptions::default()).unwrap();
        assert!((map.weight(1)[(0, 0)] - (-0.01f64).exp()).abs() < 1e-15);
        assert!((map.weight(1)[(0, 0)] - 0.990049834).abs() < 1e-9);
        assert!(map.weight(2).iter().chain(map.weight(3).iter()).all(|&v| v == 0.0));

        let rot = PolynomialSystem::linear(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])).unwrap();
        let map = build_map(&rot, 0.1, 3, &BuildOptions::default()).unwrap();
        let (c, s) = (0.1f64.cos(), 0.1f64.sin());
        let want = DMatrix::from_row_slice(2, 2, &[c, s, -s, c]);
        assert!((map.weight(1) - want).abs().max() < 1e-14);
        assert!(map.weight(2).abs().max() == 0.0 && map.weight(3).abs().max() == 0.0);
    }

    #[test]
    fn vdp_structure() {
        let map = build_map(&vdp_system(), 0.01, 3, &BuildOptions::default()).unwrap();
        assert!(map.weight(0).iter().all(|&v| v == 0.0));
        assert!(map.weight(2).abs().max() <= 1e-12);
        assert_eq!(map.weight(3).shape(), (2, 4));
    }

    #[test]
    fn single_quadratic_weight() {
        let mut w2 = DMatrix::zeros(2, 3);
        w2[(1, 1)] = 1.0;
        let map = PolynomialMap::from_blocks(0.1, &[DMatrix::zeros(2, 1), DMatrix::zeros(2, 2), w2]).unwrap();
        assert_eq!(map.apply(&[2.0, 3.0]).unwrap(), vec![0.0, 6.0]);
    }

    #[test]
    fn iterate_lengths_and_divergence() {
        let map = build_map(&vdp_system(), 0.01, 3, &BuildOptions::default()).unwrap();
        let tr = map.iterate(&[-2.0, 4.0], 0).unwrap();
        assert_eq!(tr.states(), &[vec![-2.0, 4.0]]);
        assert_eq!(map.iterate(&[-2.0, 4.0], 25).unwrap().len(), 26);

        // y ← y² blows up from y = 10 in a handful of steps
        let mut w2 = DMatrix::zeros(1, 1);
        w2[(0, 0)] = 1.0;
        let blow = PolynomialMap::from_blocks(1.0, &[DMatrix::zeros(1, 1), DMatrix::zeros(1, 1), w2]).unwrap();
        let (tr, err) = blow.iterate_partial(&[10.0], 50).unwrap();
        match err {
            Some(Error::Diverged { step, last_valid }) => {
                assert_eq!(last_valid, step - 1);
                assert_eq!(tr.len(), step);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
        assert!(blow.iterate(&[10.0], 50).is_err());
        assert!(map.iterate(&[1.0], 3).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let map = build_map(&vdp_system(), 0.01, 5, &BuildOptions::default()).unwrap();
        let back = PolynomialMap::from_json(&map.to_json().unwrap()).unwrap();
        assert_eq!(back, map);
        assert!(PolynomialMap::from_json("{\"n\": 2}").is_err());
        let wrong_basis = map.to_json().unwrap().replace(BASIS_TAG, "lex");
        assert!(PolynomialMap::from_json(&wrong_basis).is_err());
    }

    #[test]
    fn batch_matches_single() {
        let map = build_map(&vdp_system(), 0.01, 3, &BuildOptions::default()).unwrap();
        let xs: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64 * 0.05 - 1.0, 0.3]).collect();
        let seq = map.apply_batch(&xs, Exec::Sequential).unwrap();
        let par = map.apply_batch(&xs, Exec::Parallel).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq[10], map.apply(&xs[10]).unwrap());
    }

    #[test]
    fn rejects_bad_arguments() {
        let sys = vdp_system();
        assert!(build_map(&sys, 0.0, 3, &BuildOptions::default()).is_err());
        assert!(build_map(&sys, 0.01, 0, &BuildOptions::default()).is_err());
        assert!(build_map(&sys, 0.01, 3, &BuildOptions::with_backend(Backend::Rk4 { substeps: 0 })).is_err());
    }
}
