//! Non-repeating polynomial features `[1, η, η⊗η, η⊗η⊗η, ...]`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Polynomial basis over `input_dim` variables with every monomial of total
/// degree `0..=max_degree` appearing once.
///
/// Terms are in graded lexicographic order: by total degree, then by the
/// sorted list of variable indices (so `η0²` precedes `η0·η1`). The order is
/// part of the weight-file contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BasisSpec", into = "BasisSpec")]
pub struct PolyBasis {
    input_dim: usize,
    max_degree: usize,
    exponents: Vec<Vec<u32>>,
    // term k = term parent[k] * η[var[k]]; unused for the constant term
    parent: Vec<usize>,
    var: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct BasisSpec {
    input_dim: usize,
    max_degree: usize,
}

impl TryFrom<BasisSpec> for PolyBasis {
    type Error = Error;
    fn try_from(s: BasisSpec) -> Result<Self> {
        PolyBasis::new(s.input_dim, s.max_degree)
    }
}

impl From<PolyBasis> for BasisSpec {
    fn from(b: PolyBasis) -> Self {
        BasisSpec {
            input_dim: b.input_dim,
            max_degree: b.max_degree,
        }
    }
}

impl PolyBasis {
    pub fn new(input_dim: usize, max_degree: usize) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::invalid("basis", "input_dim must be >= 1"));
        }
        // index lists of the previous degree, in lexicographic order
        let mut exponents = vec![vec![0u32; input_dim]];
        let mut parent = vec![0];
        let mut var = vec![0];
        let mut prev: Vec<(Vec<usize>, usize)> = vec![(Vec::new(), 0)];
        for _ in 1..=max_degree {
            let mut next = Vec::new();
            for (idx, term) in &prev {
                let start = idx.last().copied().unwrap_or(0);
                for v in start..input_dim {
                    let mut new_idx = idx.clone();
                    new_idx.push(v);
                    let mut e = vec![0u32; input_dim];
                    for &i in &new_idx {
                        e[i] += 1;
                    }
                    let k = exponents.len();
                    exponents.push(e);
                    parent.push(*term);
                    var.push(v);
                    next.push((new_idx, k));
                }
            }
            prev = next;
        }
        Ok(Self {
            input_dim,
            max_degree,
            exponents,
            parent,
            var,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    /// Index of the term with the given exponent vector, if present.
    pub fn term_index(&self, exponent: &[u32]) -> Option<usize> {
        self.exponents.iter().position(|e| e == exponent)
    }

    /// SHA-256 of the exponent list, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for e in &self.exponents {
            for &x in e {
                h.update(x.to_le_bytes());
            }
            h.update([0xff]);
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    fn check(&self, eta: &[f64]) -> Result<()> {
        if eta.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: eta.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, eta: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(eta, &mut out)?;
        Ok(out)
    }

    /// Writes the features into `out`, which must hold `len()` values.
    pub fn eval_into(&self, eta: &[f64], out: &mut [f64]) -> Result<()> {
        self.check(eta)?;
        if out.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: out.len(),
            });
        }
        out[0] = 1.0;
        for k in 1..out.len() {
            out[k] = out[self.parent[k]] * eta[self.var[k]];
        }
        Ok(())
    }

    /// Multiplications performed by one [`PolyBasis::eval`].
    pub fn eval_multiplies(&self) -> usize {
        self.len() - 1
    }

    /// Jacobian of the feature vector, row-major `len() × input_dim`.
    pub fn gradient(&self, eta: &[f64]) -> Result<Vec<f64>> {
        let mut f = vec![0.0; self.len()];
        let mut jac = vec![0.0; self.len() * self.input_dim];
        self.eval_with_gradient(eta, &mut f, &mut jac)?;
        Ok(jac)
    }

    /// Features and their Jacobian in one forward pass over the term tree.
    pub fn eval_with_gradient(&self, eta: &[f64], f: &mut [f64], jac: &mut [f64]) -> Result<()> {
        self.check(eta)?;
        let n = self.input_dim;
        if f.len() != self.len() || jac.len() != self.len() * n {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: f.len(),
            });
        }
        f[0] = 1.0;
        jac[..n].fill(0.0);
        for k in 1..self.len() {
            let (p, v) = (self.parent[k], self.var[k]);
            f[k] = f[p] * eta[v];
            for j in 0..n {
                jac[k * n + j] = jac[p * n + j] * eta[v];
            }
            jac[k * n + v] += f[p];
        }
        Ok(())
    }

    /// `Σ_k w_k ∂φ_k/∂η`, the gradient of a linear-in-weight model.
    pub fn weighted_gradient(&self, eta: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
        if weights.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: weights.len(),
            });
        }
        let jac = self.gradient(eta)?;
        let n = self.input_dim;
        let mut g = vec![0.0; n];
        for (k, w) in weights.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            for j in 0..n {
                g[j] += w * jac[k * n + j];
            }
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    // brute-force count of exponent vectors in [0, d]^n summing to d
    fn enumerate_degree(n: usize, d: u32) -> usize {
        let mut count = 0;
        let total = (d as usize + 1).pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut s = 0;
            for _ in 0..n {
                s += (c % (d as usize + 1)) as u32;
                c /= d as usize + 1;
            }
            if s == d {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn neuron_counts() {
        assert_eq!(PolyBasis::new(4, 2).unwrap().len(), 15);
        assert_eq!(PolyBasis::new(4, 3).unwrap().len(), 35);
    }

    #[test]
    fn term_count_matches_enumeration() {
        for n in 1..=5usize {
            for d in 1..=3usize {
                let b = PolyBasis::new(n, d).unwrap();
                let mut per_degree = vec![0usize; d + 1];
                for e in b.exponents() {
                    per_degree[e.iter().sum::<u32>() as usize] += 1;
                }
                for (deg, &c) in per_degree.iter().enumerate() {
                    assert_eq!(c, enumerate_degree(n, deg as u32));
                    assert_eq!(c as u64, binomial((n + deg - 1) as u64, deg as u64).max(1));
                }
            }
        }
    }

    #[test]
    fn terms_unique_and_graded() {
        let b = PolyBasis::new(4, 3).unwrap();
        let mut seen = std::collections::HashSet::new();
        let mut last_deg = 0;
        for e in b.exponents() {
            assert!(seen.insert(e.clone()));
            let deg: u32 = e.iter().sum();
            assert!(deg >= last_deg);
            last_deg = deg;
        }
        assert_eq!(b.exponents()[0], vec![0, 0, 0, 0]);
        assert_eq!(b.exponents()[1], vec![1, 0, 0, 0]);
        assert_eq!(b.exponents()[5], vec![2, 0, 0, 0]);
        assert_eq!(b.exponents()[6], vec![1, 1, 0, 0]);
    }

    #[test]
    fn zero_input_leaves_constant() {
        let b = PolyBasis::new(4, 3).unwrap();
        let f = b.eval(&[0.0; 4]).unwrap();
        assert_eq!(f[0], 1.0);
        assert!(f[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn dimension_mismatch() {
        let b = PolyBasis::new(4, 2).unwrap();
        assert!(matches!(b.eval(&[1.0; 3]), Err(Error::DimensionMismatch { expected: 4, got: 3 })));
        assert!(b.gradient(&[1.0; 5]).is_err());
    }

    #[test]
    fn product_rule_example() {
        let b = PolyBasis::new(4, 2).unwrap();
        let k = b.term_index(&[1, 1, 0, 0]).unwrap();
        let jac = b.gradient(&[2.0, 3.0, 0.0, 0.0]).unwrap();
        assert_eq!(&jac[k * 4..k * 4 + 4], &[3.0, 2.0, 0.0, 0.0]);
        assert!(jac[..4].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn fingerprint_tracks_ordering() {
        let a = PolyBasis::new(4, 3).unwrap();
        assert_eq!(a.fingerprint(), PolyBasis::new(4, 3).unwrap().fingerprint());
        assert_ne!(a.fingerprint(), PolyBasis::new(4, 2).unwrap().fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
    }

    fn finite_difference_check(n: usize, d: usize, eta: &[f64]) -> std::result::Result<(), String> {
        let b = PolyBasis::new(n, d).unwrap();
        let jac = b.gradient(eta).unwrap();
        let h = 1e-6;
        for j in 0..n {
            let mut up = eta.to_vec();
            let mut dn = eta.to_vec();
            up[j] += h;
            dn[j] -= h;
            let fu = b.eval(&up).unwrap();
            let fd = b.eval(&dn).unwrap();
            for k in 0..b.len() {
                let fdv = (fu[k] - fd[k]) / (2.0 * h);
                let an = jac[k * n + j];
                if (fdv - an).abs() > 1e-6 * an.abs().max(1.0) {
                    return Err(format!("term {k} var {j}: fd {fdv} vs analytic {an}"));
                }
            }
        }
        Ok(())
    }

    proptest! {
        #[test]
        fn gradient_matches_central_differences(
            eta in proptest::collection::vec(-1.5f64..1.5, 5),
            n in 1usize..=5,
            d in 1usize..=3,
        ) {
            prop_assert!(finite_difference_check(n, d, &eta[..n]).is_ok(),
                "{:?}", finite_difference_check(n, d, &eta[..n]));
        }

        #[test]
        fn permutation_consistent(eta in proptest::collection::vec(-2.0f64..2.0, 4), perm_seed in 0usize..24) {
            let b = PolyBasis::new(4, 3).unwrap();
            // decode a permutation of 4 elements
            let mut pool: Vec<usize> = (0..4).collect();
            let mut perm = Vec::new();
            let mut s = perm_seed;
            for r in (1..=4).rev() {
                perm.push(pool.remove(s % r));
                s /= r;
            }
            let permuted: Vec<f64> = (0..4).map(|i| eta[perm[i]]).collect();
            let f = b.eval(&eta).unwrap();
            let fp = b.eval(&permuted).unwrap();
            for (k, e) in b.exponents().iter().enumerate() {
                // exponent e on permuted input equals exponent e' on the original
                let mut e2 = vec![0u32; 4];
                for i in 0..4 {
                    e2[perm[i]] = e[i];
                }
                let k2 = b.term_index(&e2).unwrap();
                prop_assert!((fp[k] - f[k2]).abs() <= 1e-12 * f[k2].abs().max(1.0));
            }
        }
    }
}
