//! Monomial bases for reduced Kronecker powers.
//!
//! The degree-`k` reduced Kronecker power of an `n`-vector keeps one entry per
//! distinct monomial `x^α`, `|α| = k`. Entries are ordered graded-lexicographic
//! descending on `(α_1, …, α_n)`, so for `n = 2` the degree-2 block reads
//! `(x1², x1·x2, x2²)`. Every serialized weight matrix relies on this order.

use crate::error::{Error, Result};

/// Exponent vector labelling the monomial `Π x_m^{α_m}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// `e_m` in dimension `n`.
    pub fn unit(n: usize, m: usize) -> Self {
        let mut e = vec![0; n];
        e[m] = 1;
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }

    /// Exponent-wise sum, i.e. the label of the product monomial.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `α − e_m`, or `None` when `α_m = 0`.
    pub fn lower(&self, m: usize) -> Option<MultiIndex> {
        if self.0[m] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[m] -= 1;
        Some(MultiIndex(e))
    }

    /// Evaluates `x^α` as a product of integer powers.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .filter(|(&a, _)| a > 0)
            .map(|(&a, &xm)| xm.powi(a as i32))
            .product()
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

/// All multi-indices of one total degree, in graded-lex descending order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialBasis {
    n: usize,
    degree: usize,
    entries: Vec<MultiIndex>,
}

impl MonomialBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn entries(&self) -> &[MultiIndex] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Position of `alpha` inside this block, computed by ranking rather than
    /// search.
    pub fn index_of(&self, alpha: &MultiIndex) -> Result<usize> {
        if alpha.dim() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "multi-index has {} entries, basis dimension is {}",
                alpha.dim(),
                self.n
            )));
        }
        if alpha.degree() != self.degree {
            return Err(Error::DimensionMismatch(format!(
                "multi-index degree {} does not match basis degree {}",
                alpha.degree(),
                self.degree
            )));
        }
        Ok(rank(alpha.exponents(), self.degree))
    }
}

/// Rank of `alpha` among the degree-`k` indices of its dimension.
fn rank(alpha: &[u32], k: usize) -> usize {
    let mut pos = 0usize;
    let mut remaining = k;
    let vars = alpha.len();
    for (m, &a) in alpha.iter().enumerate().take(vars.saturating_sub(1)) {
        let a = a as usize;
        // Every index with a larger leading exponent precedes `alpha`.
        for lead in (a + 1)..=remaining {
            pos += binomial(vars - m - 2 + remaining - lead, remaining - lead)
                .expect("rank arithmetic stays below the already-enumerated basis size");
        }
        remaining -= a;
    }
    pos
}

fn binomial(n: usize, k: usize) -> Result<usize> {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 1..=k as u128 {
        c = c
            .checked_mul(n as u128 - k as u128 + i)
            .ok_or(Error::Overflow { n, k })?
            / i;
    }
    usize::try_from(c).map_err(|_| Error::Overflow { n, k })
}

/// Number of degree-`k` monomials in `n` variables, `C(n+k−1, k)`.
pub fn basis_dim(n: usize, k: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidArgument("state dimension must be at least 1".into()));
    }
    let top = (n - 1).checked_add(k).ok_or(Error::Overflow { n, k })?;
    binomial(top, k)
}

/// Enumerates the degree-`k` monomial basis in `n` variables.
pub fn basis(n: usize, k: usize) -> Result<MonomialBasis> {
    let size = basis_dim(n, k)?;
    let mut entries = Vec::with_capacity(size);
    let mut current = vec![0u32; n];
    enumerate(&mut current, 0, k, &mut entries);
    debug_assert_eq!(entries.len(), size);
    Ok(MonomialBasis { n, degree: k, entries })
}

fn enumerate(current: &mut [u32], m: usize, remaining: usize, out: &mut Vec<MultiIndex>) {
    if m + 1 == current.len() {
        current[m] = remaining as u32;
        out.push(MultiIndex(current.to_vec()));
        return;
    }
    for a in (0..=remaining).rev() {
        current[m] = a as u32;
        enumerate(current, m + 1, remaining - a, out);
    }
}

fn check_finite(x: &[f64]) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("monomial argument".into()))
    }
}

/// Reduced Kronecker power `X^{[k]}` evaluated entrywise as exponent products.
pub fn reduced_kron(x: &[f64], k: usize) -> Result<Vec<f64>> {
    check_finite(x)?;
    Ok(basis(x.len(), k)?.entries.iter().map(|a| a.eval(x)).collect())
}

/// Concatenation of `reduced_kron(x, 0..=max_degree)`; the leading entry is 1.
pub fn stacked_monomials(x: &[f64], max_degree: usize) -> Result<Vec<f64>> {
    check_finite(x)?;
    let mut out = Vec::new();
    for d in 0..=max_degree {
        out.extend(basis(x.len(), d)?.entries.iter().map(|a| a.eval(x)));
    }
    Ok(out)
}

/// Blocks `MonomialBasis(n, 0) … MonomialBasis(n, K)` laid end to end.
///
/// Besides the global layout this caches, for every monomial of degree ≥ 1, a
/// parent monomial one degree lower and the variable that lifts it, so a full
/// monomial vector costs one multiplication per entry.
#[derive(Clone, Debug)]
pub struct StackedBasis {
    n: usize,
    max_degree: usize,
    blocks: Vec<MonomialBasis>,
    offsets: Vec<usize>,
    parents: Vec<(usize, usize)>,
}

impl StackedBasis {
    pub fn new(n: usize, max_degree: usize) -> Result<Self> {
        let mut blocks = Vec::with_capacity(max_degree + 1);
        let mut offsets = Vec::with_capacity(max_degree + 2);
        let mut total = 0usize;
        for d in 0..=max_degree {
            let b = basis(n, d)?;
            offsets.push(total);
            total = total.checked_add(b.len()).ok_or(Error::Overflow { n, k: d })?;
            blocks.push(b);
        }
        offsets.push(total);

        let mut parents = vec![(0, 0); total];
        for d in 1..=max_degree {
            for (i, alpha) in blocks[d].entries.iter().enumerate() {
                let m = alpha
                    .exponents()
                    .iter()
                    .position(|&a| a > 0)
                    .expect("degree ≥ 1 has a nonzero exponent");
                let lower = alpha.lower(m).expect("exponent checked positive");
                let j = offsets[d - 1] + rank(lower.exponents(), d - 1);
                parents[offsets[d] + i] = (j, m);
            }
        }
        Ok(StackedBasis { n, max_degree, blocks, offsets, parents })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Total number of monomials `N`.
    pub fn len(&self) -> usize {
        self.offsets[self.max_degree + 1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn block(&self, d: usize) -> &MonomialBasis {
        &self.blocks[d]
    }

    /// Global offset of the degree-`d` block; `offset(K + 1)` is `len()`.
    pub fn offset(&self, d: usize) -> usize {
        self.offsets[d]
    }

    /// Global position of `alpha`, if its degree is within range.
    pub fn index_of(&self, alpha: &MultiIndex) -> Result<usize> {
        let d = alpha.degree();
        if d > self.max_degree {
            return Err(Error::DimensionMismatch(format!(
                "degree {d} exceeds stacked maximum {}",
                self.max_degree
            )));
        }
        Ok(self.offsets[d] + self.blocks[d].index_of(alpha)?)
    }

    /// For entry `i ≥ 1`, the entry one degree lower and the variable `m` with
    /// `z[i] = z[parent] · x[m]`.
    pub fn parent(&self, i: usize) -> Option<(usize, usize)> {
        (i > 0 && i < self.len()).then(|| self.parents[i])
    }

    /// Iterates `(global index, degree, multi-index)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &MultiIndex)> + '_ {
        self.blocks.iter().enumerate().flat_map(move |(d, b)| {
            b.entries
                .iter()
                .enumerate()
                .map(move |(i, a)| (self.offsets[d] + i, d, a))
        })
    }

    /// Writes the stacked monomial vector of `x` into `out` (length `len()`).
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.len());
        out[0] = 1.0;
        for i in 1..out.len() {
            let (p, m) = self.parents[i];
            out[i] = out[p] * x[m];
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(x, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn printed_orderings() {
        let b2: Vec<_> = basis(2, 2).unwrap().entries().to_vec();
        assert_eq!(b2, vec![mi(&[2, 0]), mi(&[1, 1]), mi(&[0, 2])]);
        let b3: Vec<_> = basis(2, 3).unwrap().entries().to_vec();
        assert_eq!(b3, vec![mi(&[3, 0]), mi(&[2, 1]), mi(&[1, 2]), mi(&[0, 3])]);
        assert_eq!(basis(1, 5).unwrap().entries(), &[mi(&[5])]);
    }

    #[test]
    fn dims() {
        assert_eq!(basis_dim(2, 3).unwrap(), 4);
        assert_eq!(basis_dim(3, 2).unwrap(), 6);
        for n in 1..10 {
            assert_eq!(basis_dim(n, 0).unwrap(), 1);
        }
        assert!(basis(0, 2).is_err());
        assert!(basis_dim(0, 0).is_err());
    }

    #[test]
    fn dim_overflow_is_reported() {
        assert!(matches!(basis_dim(200, 200), Err(Error::Overflow { .. })));
        assert!(matches!(
            basis_dim(usize::MAX, 2),
            Err(Error::Overflow { .. })
        ));
    }

    #[test]
    fn kron_values() {
        assert_eq!(reduced_kron(&[2.0, 3.0], 2).unwrap(), vec![4.0, 6.0, 9.0]);
        assert_eq!(reduced_kron(&[2.0, 3.0], 1).unwrap(), vec![2.0, 3.0]);
        assert_eq!(reduced_kron(&[2.0, 3.0], 3).unwrap(), vec![8.0, 12.0, 18.0, 27.0]);
        assert_eq!(reduced_kron(&[2.0, 3.0], 0).unwrap(), vec![1.0]);
        assert!(reduced_kron(&[f64::NAN, 1.0], 2).is_err());
    }

    #[test]
    fn stacked_values() {
        assert_eq!(
            stacked_monomials(&[2.0, 3.0], 2).unwrap(),
            vec![1.0, 2.0, 3.0, 4.0, 6.0, 9.0]
        );
        let z = stacked_monomials(&[0.0, 0.0], 4).unwrap();
        assert_eq!(z[0], 1.0);
        assert!(z[1..].iter().all(|&v| v == 0.0));
        assert_eq!(stacked_monomials(&[1.0, 1.0], 2).unwrap(), vec![1.0; 6]);
    }

    #[test]
    fn index_lookup() {
        let b2 = basis(2, 2).unwrap();
        assert_eq!(b2.index_of(&mi(&[1, 1])).unwrap(), 1);
        assert_eq!(basis(2, 3).unwrap().index_of(&mi(&[0, 3])).unwrap(), 3);
        assert!(b2.index_of(&mi(&[3, 0])).is_err());
        assert!(b2.index_of(&mi(&[1, 1, 0])).is_err());
    }

    #[test]
    fn stacked_layout() {
        let s = StackedBasis::new(2, 3).unwrap();
        assert_eq!(s.len(), 10);
        assert_eq!((0..=4).map(|d| s.offset(d)).collect::<Vec<_>>(), vec![0, 1, 3, 6, 10]);
        assert_eq!(s.index_of(&mi(&[2, 1])).unwrap(), 7);
        assert!(s.index_of(&mi(&[2, 2])).is_err());
        let x = [0.3, -1.7];
        for (a, b) in s.eval(&x).iter().zip(stacked_monomials(&x, 3).unwrap()) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
        }
    }
}
