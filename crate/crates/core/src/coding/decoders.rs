use std::ops::ControlFlow;

use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;

use super::channel::DecodingNfg;
use crate::beta::{Beta, ExactBeta};
use crate::bethe::{minimize_bethe, MinimizeOptions};
use crate::caps::Caps;
use crate::covers::{build_cover, enumerate_covers, lift_counts};
use crate::error::{Error, Result};
use crate::gibbs::log_sum_exp;
use crate::nfg::{for_each_valid, Configuration, Nfg, Symbol};

/// Beliefs closer than this count as equal when taking argmaxes.
const ARGMAX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// One symbol per code position.
    pub decision: Vec<Symbol>,
    /// Belief over the alphabet per code position.
    pub marginals: Vec<Vec<f64>>,
    pub beta: Option<Beta>,
    /// Set when the decision was chosen among equally good candidates.
    pub tie: bool,
    /// Energy or free energy of the returned point.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn argmax(v: &[f64]) -> (Symbol, bool) {
    let best = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let hits: Vec<usize> = (0..v.len()).filter(|&i| v[i] >= best - ARGMAX_TOL).collect();
    (hits[0] as Symbol, hits.len() > 1)
}

fn from_beta(dec: &DecodingNfg, beta: Beta, objective: f64, iterations: usize, converged: bool, tie: bool) -> DecodeResult {
    let marginals: Vec<Vec<f64>> = dec.symbol_edges.iter().map(|&e| beta.edges[e].clone()).collect();
    let picks: Vec<(Symbol, bool)> = marginals.iter().map(|m| argmax(m)).collect();
    DecodeResult {
        decision: picks.iter().map(|p| p.0).collect(),
        tie: tie || picks.iter().any(|p| p.1),
        marginals,
        beta: Some(beta),
        objective,
        iterations,
        converged,
    }
}

fn exact_value(nfg: &Nfg, positions: &[usize]) -> BigRational {
    positions
        .iter()
        .enumerate()
        .fold(BigRational::one(), |acc, (f, &p)| acc * &nfg.factor(f).table.exact_values()[p])
}

/// Blockwise MAP: the valid configuration with the largest global value. Equal values are
/// resolved towards the lexicographically smallest decision and flagged.
pub fn bmapd(dec: &DecodingNfg, caps: &Caps) -> Result<DecodeResult> {
    let nfg = &dec.nfg;
    let mut best: Option<(BigRational, Vec<Symbol>, Vec<Symbol>)> = None;
    let mut tie = false;
    for_each_valid(nfg, caps, &[], |a, positions| {
        let value = exact_value(nfg, positions);
        let decision: Vec<Symbol> = dec.symbol_edges.iter().map(|&e| a[e]).collect();
        match &best {
            Some((v, d, _)) if value == *v => {
                tie = true;
                if decision < *d {
                    best = Some((value, decision, a.to_vec()));
                }
            }
            Some((v, _, _)) if value < *v => {}
            _ => {
                tie = false;
                best = Some((value, decision, a.to_vec()));
            }
        }
        ControlFlow::Continue(())
    })?;
    let (value, decision, config) = best.ok_or(Error::EmptyCode)?;
    let beta = ExactBeta::vertex(nfg, &Configuration(config))?.to_f64();
    let marginals = dec.symbol_edges.iter().map(|&e| beta.edges[e].clone()).collect();
    Ok(DecodeResult {
        decision,
        marginals,
        beta: Some(beta),
        tie,
        objective: -crate::rational::to_f64(&value).ln(),
        iterations: 0,
        converged: true,
    })
}

/// Symbolwise MAP: exact marginals of the global function on each code position.
pub fn smapd(dec: &DecodingNfg, caps: &Caps) -> Result<DecodeResult> {
    let nfg = &dec.nfg;
    let mut logs = Vec::new();
    let mut configs = Vec::new();
    for_each_valid(nfg, caps, &[], |a, positions| {
        logs.push(positions.iter().enumerate().map(|(f, &p)| nfg.factor(f).table.values()[p].ln()).sum::<f64>());
        configs.push(a.to_vec());
        ControlFlow::Continue(())
    })?;
    if configs.is_empty() {
        return Err(Error::EmptyCode);
    }
    let lz = log_sum_exp(logs.iter().copied());
    let mut beta = Beta::zeros(nfg);
    for (a, l) in configs.iter().zip(&logs) {
        let p = (l - lz).exp();
        for f in 0..nfg.factors().len() {
            *beta.factors[f].entry(nfg.local_index(f, a)).or_insert(0.0) += p;
        }
        for (e, &s) in a.iter().enumerate() {
            beta.edges[e][s as usize] += p;
        }
    }
    Ok(from_beta(dec, beta, -lz, 0, true, false))
}

/// Blockwise graph-cover decoding: the minimizer of `F_B` at zero temperature, by linear programming.
pub fn bgcd(dec: &DecodingNfg) -> Result<DecodeResult> {
    let min = minimize_bethe(&dec.nfg, 0.0, &MinimizeOptions::default())?;
    Ok(from_beta(dec, min.beta, min.f_min, min.iterations, min.converged, min.tie))
}

/// Symbolwise graph-cover decoding: the minimizer of `F_B` at unit temperature.
pub fn sgcd(dec: &DecodingNfg, opts: &MinimizeOptions) -> Result<DecodeResult> {
    let min = minimize_bethe(&dec.nfg, 1.0, opts)?;
    Ok(from_beta(dec, min.beta, min.f_min, min.iterations, min.converged, min.tie))
}

/// Degree-M blockwise graph-cover decoding by exhaustive search over covers and their
/// configurations. Returns the pseudo-marginal vector of the best cover configuration.
pub fn bgcd_degree_m(dec: &DecodingNfg, m: u32, caps: &Caps) -> Result<DecodeResult> {
    let base = &dec.nfg;
    let covers = enumerate_covers(base, m, caps)?;
    let found: Vec<Option<(BigRational, ExactBeta, bool)>> = covers
        .par_bridge()
        .map(|spec| {
            let cover = build_cover(&spec)?;
            let mut best: Option<(BigRational, ExactBeta, bool)> = None;
            for_each_valid(&cover.nfg, caps, &[], |a, positions| {
                let value = exact_value(&cover.nfg, positions);
                if best.as_ref().is_some_and(|(v, _, _)| value < *v) {
                    return ControlFlow::Continue(());
                }
                let beta = lift_counts(base, &cover, a).to_beta(m).canonical();
                best = Some(match best.take() {
                    Some((v, b, t)) if v == value => {
                        let tie = t || b != beta;
                        if beta < b { (v, beta, tie) } else { (v, b, tie) }
                    }
                    _ => (value, beta, false),
                });
                ControlFlow::Continue(())
            })?;
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(BigRational, ExactBeta, bool)> = None;
    for (v, b, t) in found.into_iter().flatten() {
        best = Some(match best.take() {
            None => (v, b, t),
            Some((bv, _, _)) if v > bv => (v, b, t),
            Some((bv, bb, bt)) if v == bv => {
                let tie = bt || t || bb != b;
                if b < bb { (v, b, tie) } else { (bv, bb, tie) }
            }
            Some(keep) => keep,
        });
    }
    let (value, beta, tie) = best.ok_or(Error::EmptyCode)?;
    let energy = -crate::rational::to_f64(&value).ln() / m as f64;
    Ok(from_beta(dec, beta.to_f64(), energy, 0, true, tie))
}

/// Degree-M symbolwise graph-cover decoding computed from its definition: the cover-partition
/// weighted average of the marginals at copy 1, which by symmetry equals the average over copies.
pub fn sgcd_degree_m(dec: &DecodingNfg, m: u32, caps: &Caps) -> Result<DecodeResult> {
    let base = &dec.nfg;
    let covers = enumerate_covers(base, m, caps)?;
    let partial: Vec<(Beta, f64)> = covers
        .par_bridge()
        .map(|spec| {
            let cover = build_cover(&spec)?;
            let mut acc = Beta::zeros(base);
            let mut z = 0.0;
            for_each_valid(&cover.nfg, caps, &[], |a, positions| {
                let g: f64 = positions.iter().enumerate().map(|(f, &p)| cover.nfg.factor(f).table.values()[p]).product();
                z += g;
                for f in 0..base.factors().len() {
                    let copy = cover.factor_copy[f][0];
                    let index = cover.nfg.local_index(copy, a);
                    *acc.factors[f].entry(index).or_insert(0.0) += g;
                }
                for e in 0..base.edges().len() {
                    acc.edges[e][a[cover.edge_copy[e][0]] as usize] += g;
                }
                ControlFlow::Continue(())
            })?;
            Ok((acc, z))
        })
        .collect::<Result<_>>()?;
    let mut total = Beta::zeros(base);
    let mut z_prime = 0.0;
    for (acc, z) in &partial {
        z_prime += z;
        for (t, a) in total.factors.iter_mut().zip(&acc.factors) {
            for (&i, &w) in a {
                *t.entry(i).or_insert(0.0) += w;
            }
        }
        for (t, a) in total.edges.iter_mut().zip(&acc.edges) {
            t.iter_mut().zip(a).for_each(|(x, y)| *x += y);
        }
    }
    if !(z_prime > 0.0) {
        return Err(Error::EmptyCode);
    }
    total.factors.iter_mut().flat_map(|m| m.values_mut()).for_each(|w| *w /= z_prime);
    total.edges.iter_mut().flatten().for_each(|w| *w /= z_prime);
    Ok(from_beta(dec, total, -z_prime.ln(), 0, true, false))
}

/// True when some valid configuration carries `decision` on the symbol edges.
pub fn decision_is_codeword(dec: &DecodingNfg, decision: &[Symbol], caps: &Caps) -> Result<bool> {
    let mut hit = false;
    for_each_valid(&dec.nfg, caps, &[], |a, _| {
        if dec.symbol_edges.iter().zip(decision).all(|(&e, &s)| a[e] == s) {
            hit = true;
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    })?;
    Ok(hit)
}
