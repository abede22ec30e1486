//! Method of types over the valid configurations of an NFG.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::gibbs::{entropy, global_function_exact};
use crate::nfg::{Configuration, Nfg};
use crate::rational::{ln_multinomial, multinomial};

/// Empirical distribution of a length-`M` sequence of configurations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeVector {
    m: u32,
    counts: BTreeMap<Configuration, u32>,
}

impl TypeVector {
    /// Type from explicit occurrence counts; `M` is their sum.
    pub fn from_counts(counts: BTreeMap<Configuration, u32>) -> Result<Self> {
        let m: u32 = counts.values().sum();
        if m == 0 {
            return Err(Error::InvalidArgument("a type needs at least one sample".into()));
        }
        let counts = counts.into_iter().filter(|(_, k)| *k > 0).collect();
        Ok(TypeVector { m, counts })
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn counts(&self) -> &BTreeMap<Configuration, u32> {
        &self.counts
    }

    /// `q_c` as an exact fraction with denominator `M`.
    pub fn frequency(&self, config: &Configuration) -> BigRational {
        let k = self.counts.get(config).copied().unwrap_or(0);
        BigRational::new(BigInt::from(k), BigInt::from(self.m))
    }

    /// `mean(q)`: per-edge average symbol.
    pub fn mean_vector(&self) -> Vec<BigRational> {
        let edges = self.counts.keys().next().map_or(0, |c| c.0.len());
        let mut sums = vec![BigInt::zero(); edges];
        for (c, &k) in &self.counts {
            for (acc, &s) in sums.iter_mut().zip(&c.0) {
                *acc += BigInt::from(k) * BigInt::from(s);
            }
        }
        sums.into_iter()
            .map(|s| BigRational::new(s, BigInt::from(self.m)))
            .collect()
    }

    /// Entropy in nats of the empirical distribution.
    pub fn entropy(&self) -> f64 {
        entropy(self.counts.values().map(|&k| k as f64 / self.m as f64))
    }
}

/// Type of a sequence of valid configurations.
pub fn type_of_sequence(nfg: &Nfg, seq: &[Configuration]) -> Result<TypeVector> {
    let mut counts = BTreeMap::new();
    for (i, c) in seq.iter().enumerate() {
        let valid = global_function_exact(nfg, c).map(|g| !g.is_zero()).unwrap_or(false);
        if !valid {
            return Err(Error::InvalidMember(i));
        }
        *counts.entry(c.clone()).or_insert(0) += 1;
    }
    TypeVector::from_counts(counts)
}

/// `C_M(q) = M! / prod_c (M q_c)!`.
pub fn type_class_size(q: &TypeVector) -> BigUint {
    let parts: Vec<u32> = q.counts.values().copied().collect();
    multinomial(&parts)
}

/// `(1/M) log C_M(q)`, which approaches `H(q)` as `M` grows.
pub fn type_class_log_rate(q: &TypeVector) -> f64 {
    let parts: Vec<u64> = q.counts.values().map(|&k| k as u64).collect();
    ln_multinomial(&parts) / q.m as f64
}

/// Every type with denominator `m` over the given configurations (the set `Q_M`).
pub fn types_of_degree(configs: &[Configuration], m: u32) -> Vec<TypeVector> {
    let mut out = Vec::new();
    let mut parts = vec![0u32; configs.len()];
    compositions(&mut parts, 0, m, &mut |parts| {
        let counts = configs
            .iter()
            .cloned()
            .zip(parts.iter().copied())
            .filter(|(_, k)| *k > 0)
            .collect();
        out.push(TypeVector { m, counts });
    });
    out
}

fn compositions(parts: &mut [u32], k: usize, left: u32, emit: &mut impl FnMut(&[u32])) {
    if parts.is_empty() {
        return;
    }
    if k == parts.len() - 1 {
        parts[k] = left;
        emit(parts);
        return;
    }
    for v in 0..=left {
        parts[k] = v;
        compositions(parts, k + 1, left - v, emit);
    }
}

/// `s_M(q) = Z_G^-M * exp(-M U_G(q)) * C_M(q)` at `T = 1`, exactly.
pub fn type_probability(nfg: &Nfg, q: &TypeVector, z_gibbs: &BigRational) -> Result<BigRational> {
    let mut weight = BigRational::one();
    for (c, &k) in &q.counts {
        let g = global_function_exact(nfg, c)?;
        weight *= num_traits::pow(g, k as usize);
    }
    let size = BigRational::from_integer(BigInt::from(type_class_size(q)));
    Ok(weight * size / num_traits::pow(z_gibbs.clone(), q.m as usize))
}
