//! Exact Gibbs-side quantities: global function, partition functions and free energy.

use std::ops::ControlFlow;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::nfg::{enumerate_configurations, for_each_valid, Configuration, Nfg, Symbol};

/// `x log x` with `0 log 0 = 0`.
pub fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Entropy in nats of a non-negative weight vector, assumed normalized.
pub fn entropy(p: impl IntoIterator<Item = f64>) -> f64 {
    -p.into_iter().map(xlogx).sum::<f64>()
}

pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Product of the local functions under `config`.
pub fn global_function(nfg: &Nfg, config: &Configuration) -> Result<f64> {
    nfg.check_configuration(config)?;
    Ok((0..nfg.factors().len())
        .map(|f| nfg.factor(f).table.value(nfg.local_index(f, &config.0)))
        .product())
}

/// Exact rational value of the global function.
pub fn global_function_exact(nfg: &Nfg, config: &Configuration) -> Result<BigRational> {
    nfg.check_configuration(config)?;
    let mut acc = BigRational::one();
    for f in 0..nfg.factors().len() {
        let v = nfg.factor(f).table.exact_value(nfg.local_index(f, &config.0));
        if v.is_zero() {
            return Ok(v);
        }
        acc *= v;
    }
    Ok(acc)
}

fn check_temperature(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("temperature must be positive, got {t}")))
    }
}

fn log_value(nfg: &Nfg, positions: &[usize]) -> f64 {
    positions
        .iter()
        .enumerate()
        .map(|(f, &p)| nfg.factor(f).table.values()[p].ln())
        .sum()
}

/// `log Z_G = log sum_c g(c)^(1/T)`, `-inf` when there is no valid configuration.
pub fn log_gibbs_partition(nfg: &Nfg, t: f64, caps: &Caps) -> Result<f64> {
    check_temperature(t)?;
    let mut terms = Vec::new();
    for_each_valid(nfg, caps, &[], |_, positions| {
        terms.push(log_value(nfg, positions) / t);
        ControlFlow::Continue(())
    })?;
    Ok(log_sum_exp(terms))
}

/// `Z_G`; exact when `T = 1` or every table is 0/1-valued.
pub fn gibbs_partition(nfg: &Nfg, t: f64, caps: &Caps) -> Result<f64> {
    check_temperature(t)?;
    if t == 1.0 || nfg.is_indicator() {
        return Ok(crate::rational::to_f64(&gibbs_partition_exact(nfg, caps)?));
    }
    Ok(log_gibbs_partition(nfg, t, caps)?.exp())
}

/// `Z_G` at `T = 1` in exact arithmetic.
pub fn gibbs_partition_exact(nfg: &Nfg, caps: &Caps) -> Result<BigRational> {
    let indicator = nfg.is_indicator();
    let mut count = 0u64;
    let mut sum = BigRational::zero();
    for_each_valid(nfg, caps, &[], |_, positions| {
        if indicator {
            count += 1;
        } else {
            let mut term = BigRational::one();
            for (f, &p) in positions.iter().enumerate() {
                term *= &nfg.factor(f).table.exact_values()[p];
            }
            sum += term;
        }
        ControlFlow::Continue(())
    })?;
    Ok(if indicator { BigRational::from_integer(count.into()) } else { sum })
}

/// Sum of `g(c)^(1/T)` over valid configurations whose half-edge symbols equal `half`.
///
/// `half` lists one symbol per half-edge in sorted edge order.
pub fn modified_gibbs_partition(nfg: &Nfg, half: &[Symbol], t: f64, caps: &Caps) -> Result<f64> {
    check_temperature(t)?;
    let half_edges = nfg.half_edges();
    if half.len() != half_edges.len() {
        return Err(Error::LengthMismatch { expected: half_edges.len(), found: half.len() });
    }
    for (&e, &s) in half_edges.iter().zip(half) {
        if s >= nfg.edge(e).alphabet {
            return Err(Error::OutOfAlphabet { edge: nfg.edge(e).id.clone(), symbol: s });
        }
    }
    let mut terms = Vec::new();
    for_each_valid(nfg, caps, &[], |assignment, positions| {
        if half_edges.iter().zip(half).all(|(&e, &s)| assignment[e] == s) {
            terms.push(log_value(nfg, positions) / t);
        }
        ControlFlow::Continue(())
    })?;
    Ok(log_sum_exp(terms).exp())
}

/// Probability vector over configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDistribution {
    entries: Vec<(Configuration, f64)>,
}

impl ConfigDistribution {
    pub fn new(entries: Vec<(Configuration, f64)>) -> Result<Self> {
        if let Some((_, p)) = entries.iter().find(|(_, p)| !(*p >= 0.0)) {
            return Err(Error::InvalidArgument(format!("negative probability {p}")));
        }
        let total: f64 = entries.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
        }
        Ok(ConfigDistribution { entries })
    }

    pub fn entries(&self) -> &[(Configuration, f64)] {
        &self.entries
    }

    pub fn probability(&self, config: &Configuration) -> f64 {
        self.entries
            .iter()
            .find(|(c, _)| c == config)
            .map_or(0.0, |(_, p)| *p)
    }
}

/// Average energy and entropy of a configuration distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsTerms {
    pub u: f64,
    pub h: f64,
}

impl GibbsTerms {
    pub fn free_energy(&self, t: f64) -> f64 {
        self.u - t * self.h
    }
}

/// `U_G = -sum p log g` and `H_G = -sum p log p`.
pub fn gibbs_energy_terms(nfg: &Nfg, p: &ConfigDistribution) -> Result<GibbsTerms> {
    let mut u = 0.0;
    for (config, prob) in p.entries() {
        if *prob == 0.0 {
            continue;
        }
        let g = global_function(nfg, config)?;
        if g == 0.0 {
            return Err(Error::SupportOnZeroMass);
        }
        u -= prob * g.ln();
    }
    Ok(GibbsTerms { u, h: entropy(p.entries().iter().map(|(_, q)| *q)) })
}

/// `p*(c) = g(c)^(1/T) / Z_G`.
pub fn gibbs_minimizer(nfg: &Nfg, t: f64, caps: &Caps) -> Result<ConfigDistribution> {
    check_temperature(t)?;
    let configs = enumerate_configurations(nfg, caps)?;
    if configs.is_empty() {
        return Err(Error::EmptyCode);
    }
    let logs: Vec<f64> = configs.iter().map(|c| log_value(nfg, &c.positions) / t).collect();
    let log_z = log_sum_exp(logs.iter().copied());
    let entries = configs
        .into_iter()
        .zip(logs)
        .map(|(c, l)| (c.config, (l - log_z).exp()))
        .collect::<Vec<_>>();
    let total: f64 = entries.iter().map(|(_, p)| p).sum();
    ConfigDistribution::new(entries.into_iter().map(|(c, p)| (c, p / total)).collect())
}

/// Kullback-Leibler divergence `D(p || q)` in nats; infinite when `p` is not dominated by `q`.
pub fn relative_entropy(p: &ConfigDistribution, q: &ConfigDistribution) -> f64 {
    p.entries()
        .iter()
        .filter(|(_, x)| *x > 0.0)
        .map(|(c, x)| {
            let y = q.probability(c);
            if y == 0.0 {
                f64::INFINITY
            } else {
                x * (x / y).ln()
            }
        })
        .sum()
}
