use lie_maps::polybasis::{basis, basis_dim, reduced_kron, stacked_monomials, MultiIndex, StackedBasis};
use proptest::prelude::*;

/// Every exponent vector of total degree `k`, by brute force over `[0, k]^n`,
/// sorted lexicographically from the largest.
fn brute_force(n: usize, k: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut e = vec![0u32; n];
    loop {
        if e.iter().sum::<u32>() as usize == k {
            out.push(e.clone());
        }
        let mut i = 0;
        loop {
            if i == n {
                out.sort_by(|a, b| b.cmp(a));
                return out;
            }
            if (e[i] as usize) < k {
                e[i] += 1;
                break;
            }
            e[i] = 0;
            i += 1;
        }
    }
}

fn pascal(n: usize, k: usize) -> usize {
    let mut row = vec![1usize];
    for _ in 0..n {
        let mut next = vec![1usize; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row[k]
}

#[test]
fn ordering_matches_brute_force() {
    for n in 1..=6 {
        for k in 0..=7 {
            let b = basis(n, k).unwrap();
            let want = brute_force(n, k);
            let got: Vec<Vec<u32>> = b.entries().iter().map(|a| a.exponents().to_vec()).collect();
            assert_eq!(got, want, "n={n} k={k}");
            assert_eq!(b.len(), pascal(n + k - 1, k));
            assert_eq!(b.len(), basis_dim(n, k).unwrap());
            for (i, a) in b.entries().iter().enumerate() {
                assert_eq!(b.index_of(a).unwrap(), i);
            }
        }
    }
}

#[test]
fn stacked_len_is_sum_of_blocks() {
    for n in 1..=6 {
        for k in 0..=7 {
            let s = StackedBasis::new(n, k).unwrap();
            let total: usize = (0..=k).map(|d| basis_dim(n, d).unwrap()).sum();
            assert_eq!(s.len(), total);
            // closed form C(n + K, K)
            assert_eq!(s.len(), pascal(n + k, k));
        }
    }
}

fn state(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5f64..1.5, n)
}

proptest! {
    #[test]
    fn kron_is_multiplicative((n, x) in (1usize..5).prop_flat_map(|n| (Just(n), state(n))), a in 0usize..4, b in 0usize..4) {
        let xa = reduced_kron(&x, a).unwrap();
        let xb = reduced_kron(&x, b).unwrap();
        let xab = reduced_kron(&x, a + b).unwrap();
        let ba = basis(n, a).unwrap();
        let bb = basis(n, b).unwrap();
        let bab = basis(n, a + b).unwrap();
        for (i, alpha) in ba.entries().iter().enumerate() {
            for (j, beta) in bb.entries().iter().enumerate() {
                let k = bab.index_of(&alpha.add(beta)).unwrap();
                let want = xab[k];
                prop_assert!((xa[i] * xb[j] - want).abs() <= 1e-12 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn stacked_values_match_direct_products((n, x) in (1usize..6).prop_flat_map(|n| (Just(n), state(n))), k in 0usize..6) {
        let s = StackedBasis::new(n, k).unwrap();
        let z = stacked_monomials(&x, k).unwrap();
        prop_assert_eq!(z.len(), s.len());
        for (g, d, alpha) in s.iter() {
            prop_assert_eq!(alpha.degree(), d);
            let direct: f64 = x.iter().zip(alpha.exponents()).map(|(v, &e)| v.powi(e as i32)).product();
            prop_assert!((z[g] - direct).abs() <= 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn index_of_inverts_entries(n in 1usize..7, k in 0usize..8, pick in any::<prop::sample::Index>()) {
        let b = basis(n, k).unwrap();
        let i = pick.index(b.len());
        let alpha = MultiIndex::new(b.entries()[i].exponents().to_vec());
        prop_assert_eq!(b.index_of(&alpha).unwrap(), i);
    }
}

#[test]
fn rejects_bad_input() {
    assert!(basis_dim(0, 3).is_err());
    assert!(reduced_kron(&[f64::NAN], 2).is_err());
    assert!(basis(2, 3).unwrap().index_of(&MultiIndex::new(vec![1, 1])).is_err());
}
