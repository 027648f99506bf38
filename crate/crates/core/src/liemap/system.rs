use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polybasis::{basis, basis_dim, MultiIndex};

/// Autonomous polynomial right-hand side `F(X) = Σ_d P^{1d} X^{[d]}`.
///
/// `coeffs[d]` is `n × basis_dim(n, d)` with columns in basis order.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialSystem {
    n: usize,
    coeffs: Vec<DMatrix<f64>>,
    // nonzero (target, monomial, coefficient), cached for evaluation
    sparse: Vec<(usize, MultiIndex, f64)>,
}

/// One nonzero coefficient: `ẋ_target += coeff · x^exponents`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub target: usize,
    pub exponents: Vec<u32>,
    pub coeff: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    n: usize,
    terms: Vec<Term>,
}

impl PolynomialSystem {
    pub fn new(n: usize, coeffs: Vec<DMatrix<f64>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("system needs at least the degree-0 block".into()));
        }
        for (d, p) in coeffs.iter().enumerate() {
            let cols = basis_dim(n, d)?;
            if p.nrows() != n || p.ncols() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "P^(1,{d}) is {}x{}, expected {n}x{cols}",
                    p.nrows(),
                    p.ncols()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("P^(1,{d})")));
            }
        }
        let mut sparse = Vec::new();
        for (d, p) in coeffs.iter().enumerate() {
            let b = basis(n, d)?;
            for (c, alpha) in b.entries().iter().enumerate() {
                for m in 0..n {
                    if p[(m, c)] != 0.0 {
                        sparse.push((m, alpha.clone(), p[(m, c)]));
                    }
                }
            }
        }
        Ok(PolynomialSystem { n, coeffs, sparse })
    }

    /// The vector field `F ≡ 0`.
    pub fn zero(n: usize) -> Result<Self> {
        Self::new(n, vec![DMatrix::zeros(n, 1)])
    }

    /// Linear system `ẋ = A x`.
    pub fn linear(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch("linear system matrix must be square".into()));
        }
        Self::new(n, vec![DMatrix::zeros(n, 1), a.clone()])
    }

    /// Assembles a system from sparse terms; repeated terms accumulate.
    pub fn from_terms(n: usize, terms: &[Term]) -> Result<Self> {
        let max_deg = terms
            .iter()
            .map(|t| t.exponents.iter().map(|&a| a as usize).sum::<usize>())
            .max()
            .unwrap_or(0);
        let mut coeffs = (0..=max_deg)
            .map(|d| Ok(DMatrix::zeros(n, basis_dim(n, d)?)))
            .collect::<Result<Vec<_>>>()?;
        for (k, t) in terms.iter().enumerate() {
            if t.target >= n {
                return Err(Error::DimensionMismatch(format!(
                    "term {k}: target {} out of range for n = {n}",
                    t.target
                )));
            }
            if t.exponents.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "term {k}: {} exponents for n = {n}",
                    t.exponents.len()
                )));
            }
            if !t.coeff.is_finite() {
                return Err(Error::NonFinite(format!("term {k} coefficient")));
            }
            let alpha = MultiIndex::new(t.exponents.clone());
            let d = alpha.degree();
            let col = basis(n, d)?.index_of(&alpha)?;
            coeffs[d][(t.target, col)] += t.coeff;
        }
        Self::new(n, coeffs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Highest degree block stored (possibly all zeros).
    pub fn max_deg(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `P^{1d}`, or `None` beyond `max_deg`.
    pub fn coeffs(&self, d: usize) -> Option<&DMatrix<f64>> {
        self.coeffs.get(d)
    }

    /// Coefficient of `x^alpha` in `ẋ_m`.
    pub fn coeff(&self, m: usize, alpha: &MultiIndex) -> f64 {
        let d = alpha.degree();
        match self.coeffs.get(d) {
            Some(p) => basis(self.n, d)
                .and_then(|b| b.index_of(alpha))
                .map(|c| p[(m, c)])
                .unwrap_or(0.0),
            None => 0.0,
        }
    }

    pub fn has_constant_term(&self) -> bool {
        self.coeffs[0].iter().any(|&v| v != 0.0)
    }

    /// Nonzero terms in (degree, basis) order.
    pub fn terms(&self) -> Vec<Term> {
        self.sparse
            .iter()
            .map(|(m, alpha, c)| Term { target: *m, exponents: alpha.exponents().to_vec(), coeff: *c })
            .collect()
    }

    /// Nonzero coefficients as `(target, monomial, coefficient)`.
    pub fn sparse_terms(&self) -> &[(usize, MultiIndex, f64)] {
        &self.sparse
    }

    /// `F(x)` evaluated generically from the coefficient blocks.
    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (m, alpha, c) in &self.sparse {
            out[*m] += c * alpha.eval(x);
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&SystemFile { n: self.n, terms: self.terms() })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: SystemFile = serde_json::from_str(s)?;
        if f.n == 0 {
            return Err(Error::InvalidArgument("\"n\" must be at least 1".into()));
        }
        Self::from_terms(f.n, &f.terms)
    }
}
