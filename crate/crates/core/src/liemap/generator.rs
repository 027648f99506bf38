//! Induced matrices and the stacked generator.
//!
//! For a monomial `x^α` the product rule gives
//! `d/dt x^α = Σ_m α_m x^{α−e_m} F_m(x)`, so a degree-`d` term `P[m, β] x^β`
//! of `F_m` sends row `α` (degree `i`) to column `γ = α − e_m + β`
//! (degree `i − 1 + d`) with weight `α_m · P[m, β]`.

use nalgebra::DMatrix;

use super::system::PolynomialSystem;
use crate::error::Result;
use crate::polybasis::{basis, StackedBasis};

/// Block `(i, j)`: how degree-`i` monomials evolve in terms of degree-`j` ones.
///
/// Returned shape is `basis_dim(n, i) × basis_dim(n, j)`; it is zero unless
/// `j + 1 − i` is a degree present in `sys`.
pub fn induced_block(sys: &PolynomialSystem, i: usize, j: usize) -> Result<DMatrix<f64>> {
    let n = sys.n();
    let rows = basis(n, i)?;
    let cols = basis(n, j)?;
    let mut block = DMatrix::zeros(rows.len(), cols.len());
    if i == 0 || j + 1 < i {
        return Ok(block);
    }
    let d = j + 1 - i;
    if d > sys.max_deg() {
        return Ok(block);
    }
    for (r, alpha) in rows.entries().iter().enumerate() {
        for (m, beta, c) in sys.sparse_terms() {
            if beta.degree() != d {
                continue;
            }
            let Some(lowered) = alpha.lower(*m) else { continue };
            let gamma = lowered.add(beta);
            let col = cols
                .index_of(&gamma)
                .expect("γ = α − e_m + β has degree j by construction");
            block[(r, col)] += alpha.exponents()[*m] as f64 * c;
        }
    }
    Ok(block)
}

/// Stacked generator `D` over `StackedBasis(n, K)`.
#[derive(Clone, Debug)]
pub struct GeneratorMatrix {
    basis: StackedBasis,
    matrix: DMatrix<f64>,
}

impl GeneratorMatrix {
    pub fn basis(&self) -> &StackedBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn order(&self) -> usize {
        self.basis.max_degree()
    }

    /// Copy of block `(i, j)`.
    pub fn block(&self, i: usize, j: usize) -> DMatrix<f64> {
        let (r0, r1) = (self.basis.offset(i), self.basis.offset(i + 1));
        let (c0, c1) = (self.basis.offset(j), self.basis.offset(j + 1));
        self.matrix.view((r0, c0), (r1 - r0, c1 - c0)).into_owned()
    }

    /// `D · z` for a stacked monomial vector `z`: the time derivative of every
    /// monomial up to degree `K`, truncated at `K`.
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        let v = &self.matrix * nalgebra::DVector::from_column_slice(z);
        v.as_slice().to_vec()
    }
}

/// Assembles all induced blocks for row degrees `1..=K`; contributions that
/// would land above degree `K` are dropped.
pub fn generator(sys: &PolynomialSystem, order: usize) -> Result<GeneratorMatrix> {
    let basis = StackedBasis::new(sys.n(), order)?;
    let size = basis.len();
    let mut matrix = DMatrix::zeros(size, size);
    for (row, _, alpha) in basis.iter() {
        for (m, beta, c) in sys.sparse_terms() {
            let Some(lowered) = alpha.lower(*m) else { continue };
            let gamma = lowered.add(beta);
            if gamma.degree() > order {
                continue;
            }
            let col = basis.index_of(&gamma)?;
            matrix[(row, col)] += alpha.exponents()[*m] as f64 * c;
        }
    }
    Ok(GeneratorMatrix { basis, matrix })
}
