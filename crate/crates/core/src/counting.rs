//! Average pre-image counts over all M-covers and the pseudo-marginals they realize.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::beta::{check_local_consistency, ExactBeta, Violation};
use crate::caps::Caps;
use crate::covers::{build_cover, count_covers, enumerate_covers, lift_counts, LiftCounts};
use crate::error::{Error, Result};
use crate::nfg::{for_each_valid, LocalIndex, Nfg};
use crate::rational::{ln_multinomial, multinomial};

/// `M * beta` as integer counts; `NonIntegralType` when some entry is not integral.
pub fn scaled_counts(beta: &ExactBeta, m: u32) -> Result<LiftCounts> {
    let scale = |v: &BigRational| -> Result<u32> {
        let x = v * BigRational::from_integer(BigInt::from(m));
        if !x.is_integer() {
            return Err(Error::NonIntegralType(m));
        }
        x.to_integer().to_u32().ok_or(Error::NonIntegralType(m))
    };
    let factors = beta
        .factors
        .iter()
        .map(|map| map.iter().map(|(i, v)| Ok((*i, scale(v)?))).collect::<Result<BTreeMap<_, _>>>())
        .collect::<Result<_>>()?;
    let edges = beta
        .edges
        .iter()
        .map(|w| w.iter().map(scale).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    Ok(LiftCounts { factors, edges })
}

enum Membership {
    Inside,
    OutsideSupport,
}

fn check_membership(nfg: &Nfg, beta: &ExactBeta) -> Result<Membership> {
    let report = check_local_consistency(nfg, beta, &BigRational::zero())?;
    let mut outside = false;
    for v in &report.violations {
        match v {
            Violation::OutsideSupport { .. } => outside = true,
            other => return Err(Error::InconsistentBeta(other.to_string())),
        }
    }
    Ok(if outside { Membership::OutsideSupport } else { Membership::Inside })
}

/// Closed form `prod_f multinom(M; M beta_f) / prod_{e full} multinom(M; M beta_e)`.
pub fn preimage_count_closedform(nfg: &Nfg, m: u32, beta: &ExactBeta) -> Result<BigRational> {
    beta.check_shape(nfg)?;
    let counts = scaled_counts(beta, m)?;
    if let Membership::OutsideSupport = check_membership(nfg, beta)? {
        return Ok(BigRational::zero());
    }
    let mut numer = BigUint::from(1u32);
    for map in &counts.factors {
        numer *= multinomial(&map.values().copied().collect::<Vec<_>>());
    }
    let mut denom = BigUint::from(1u32);
    for e in nfg.full_edges() {
        denom *= multinomial(&counts.edges[e]);
    }
    Ok(BigRational::new(numer.into(), denom.into()))
}

/// Average over all M-covers of the number of valid cover configurations mapping to `beta`.
pub fn preimage_count_bruteforce(nfg: &Nfg, m: u32, beta: &ExactBeta, caps: &Caps) -> Result<BigRational> {
    beta.check_shape(nfg)?;
    let target = match scaled_counts(beta, m) {
        Ok(mut c) => {
            for map in &mut c.factors {
                map.retain(|_, k| *k > 0);
            }
            c
        }
        Err(Error::NonIntegralType(_)) => return Ok(BigRational::zero()),
        Err(e) => return Err(e),
    };
    let mut hits = 0u64;
    for spec in enumerate_covers(nfg, m, caps)? {
        let cover = build_cover(&spec)?;
        for_each_valid(&cover.nfg, caps, &[], |assignment, _| {
            if lift_counts(nfg, &cover, assignment) == target {
                hits += 1;
            }
            ControlFlow::Continue(())
        })?;
    }
    Ok(BigRational::new(BigInt::from(hits), count_covers(nfg, m).into()))
}

/// `(1/M) log C_M(beta)` via log-gamma; `M` must be a multiple of the denominator of `beta`.
pub fn entropy_rate_estimate(nfg: &Nfg, beta: &ExactBeta, m: u32) -> Result<f64> {
    beta.check_shape(nfg)?;
    let counts = scaled_counts(beta, m)?;
    if let Membership::OutsideSupport = check_membership(nfg, beta)? {
        return Ok(f64::NEG_INFINITY);
    }
    let as_u64 = |v: &[u32]| v.iter().map(|&k| k as u64).collect::<Vec<_>>();
    let numer: f64 = counts
        .factors
        .iter()
        .map(|map| ln_multinomial(&map.values().map(|&k| k as u64).collect::<Vec<_>>()))
        .sum();
    let denom: f64 = nfg.full_edges().iter().map(|&e| ln_multinomial(&as_u64(&counts.edges[e]))).sum();
    Ok((numer - denom) / m as f64)
}

/// `B_M`: every pseudo-marginal vector realized by some valid configuration of some M-cover.
pub fn lift_realizable_set(nfg: &Nfg, m: u32, caps: &Caps) -> Result<BTreeSet<ExactBeta>> {
    let mut seen: BTreeSet<LiftCounts> = BTreeSet::new();
    for spec in enumerate_covers(nfg, m, caps)? {
        let cover = build_cover(&spec)?;
        for_each_valid(&cover.nfg, caps, &[], |assignment, _| {
            seen.insert(lift_counts(nfg, &cover, assignment));
            ControlFlow::Continue(())
        })?;
    }
    Ok(seen.into_iter().map(|c| c.to_beta(m)).collect())
}

/// Points of the local marginal polytope with denominator dividing `m`, found without covers.
pub fn lattice_points(nfg: &Nfg, m: u32, caps: &Caps) -> Result<Vec<ExactBeta>> {
    let bound = nfg.factors().iter().try_fold(1u128, |acc, f| {
        let k = f.table.support_len() as u128;
        let choices = binomial_u128(m as u128 + k.saturating_sub(1), k.saturating_sub(1))?;
        acc.checked_mul(choices)
    });
    caps.check_config(bound)?;
    let mut out = Vec::new();
    let mut edge_counts: Vec<Option<Vec<u32>>> = vec![None; nfg.edges().len()];
    let mut factor_counts: Vec<BTreeMap<LocalIndex, u32>> = vec![BTreeMap::new(); nfg.factors().len()];
    place_factor(nfg, m, 0, &mut edge_counts, &mut factor_counts, &mut out);
    Ok(out)
}

fn binomial_u128(n: u128, k: u128) -> Option<u128> {
    (0..k).try_fold(1u128, |acc, i| acc.checked_mul(n - i).map(|x| x / (i + 1)))
}

fn place_factor(
    nfg: &Nfg,
    m: u32,
    f: usize,
    edge_counts: &mut Vec<Option<Vec<u32>>>,
    factor_counts: &mut Vec<BTreeMap<LocalIndex, u32>>,
    out: &mut Vec<ExactBeta>,
) {
    if f == nfg.factors().len() {
        let edges = edge_counts.iter().map(|c| c.clone().expect("every edge touches a factor")).collect();
        out.push(ExactBeta::from_counts(factor_counts.clone(), edges, m));
        return;
    }
    let factor = nfg.factor(f);
    let support = factor.table.support();
    let mut parts = vec![0u32; support.len()];
    let mut visit = |parts: &[u32]| {
        let mut marginals: Vec<Vec<u32>> = factor
            .edges
            .iter()
            .map(|&e| vec![0; nfg.edge(e).alphabet as usize])
            .collect();
        for (&i, &k) in support.iter().zip(parts) {
            for (slot, marg) in marginals.iter_mut().enumerate() {
                marg[factor.table.symbol_at(i, slot) as usize] += k;
            }
        }
        let fits = factor
            .edges
            .iter()
            .zip(&marginals)
            .all(|(&e, marg)| edge_counts[e].as_ref().is_none_or(|fixed| fixed == marg));
        if !fits {
            return;
        }
        let newly: Vec<usize> = factor.edges.iter().copied().filter(|&e| edge_counts[e].is_none()).collect();
        for (&e, marg) in factor.edges.iter().zip(&marginals) {
            if edge_counts[e].is_none() {
                edge_counts[e] = Some(marg.clone());
            }
        }
        factor_counts[f] = support.iter().copied().zip(parts.iter().copied()).filter(|(_, k)| *k > 0).collect();
        place_factor(nfg, m, f + 1, edge_counts, factor_counts, out);
        for e in newly {
            edge_counts[e] = None;
        }
    };
    compositions(&mut parts, 0, m, &mut visit);
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
    for v in (0..=left).rev() {
        parts[k] = v;
        compositions(parts, k + 1, left - v, emit);
    }
}
