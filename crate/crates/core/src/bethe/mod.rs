//! Bethe-side quantities: free energy terms, degree-M partition functions, minimization,
//! sum-product and maximum-entropy completion.

mod bme;
mod coords;
mod minimize;
mod spa;

use std::ops::ControlFlow;

use nalgebra::DVector;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::beta::{check_local_consistency, Beta, ExactBeta, Violation};
use crate::caps::Caps;
use crate::counting::{lattice_points, preimage_count_closedform, scaled_counts};
use crate::covers::{build_cover, cover_at, cover_component_count, count_covers, enumerate_covers, phi_m, random_cover_with, Cover, CoverSpec};
use crate::error::{Error, Result};
use crate::gibbs::{entropy, log_sum_exp};
use crate::linalg::AffineSubspace;
use crate::nfg::{for_each_valid, Configuration, Nfg};
use crate::rational::to_f64;

pub use crate::beta::{ConsistencyReport, Violation as ConsistencyViolation};
pub use bme::{bme_completion, BmeResult};
pub use coords::BetheCoordinates;
pub use minimize::{minimize_bethe, BetheMinimum, MinimizeOptions};
pub use spa::{sum_product, SpaOptions, SpaResult, SpaState};

pub fn check_consistency(nfg: &Nfg, beta: &Beta, tol: f64) -> Result<ConsistencyReport> {
    check_local_consistency(nfg, beta, &tol)
}

/// Average energy, entropy and free energy of a pseudo-marginal vector at temperature `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetheEvaluation {
    pub u_bethe: f64,
    pub h_bethe: f64,
    pub f_bethe: f64,
    pub temperature: f64,
}

/// `U_B`, `H_B` and `F_B = U_B - T H_B`; half-edges carry no entropy term.
pub fn bethe_terms(nfg: &Nfg, beta: &Beta, t: f64) -> Result<BetheEvaluation> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("temperature must be non-negative, got {t}")));
    }
    let report = check_local_consistency(nfg, beta, &1e-9)?;
    for v in &report.violations {
        match v {
            Violation::OutsideSupport { factor, .. } => return Err(Error::SupportOnZeroFactor(factor.clone())),
            other => return Err(Error::InconsistentBeta(other.to_string())),
        }
    }
    let mut u = 0.0;
    let mut h = 0.0;
    for (f, factor) in nfg.factors().iter().enumerate() {
        for (&i, &w) in &beta.factors[f] {
            if w > 0.0 {
                u -= w * factor.table.value(i).ln();
            }
        }
        h += entropy(beta.factors[f].values().copied());
    }
    for e in nfg.full_edges() {
        h -= entropy(beta.edges[e].iter().copied());
    }
    Ok(BetheEvaluation { u_bethe: u, h_bethe: h, f_bethe: u - t * h, temperature: t })
}

pub fn bethe_terms_exact(nfg: &Nfg, beta: &ExactBeta, t: f64) -> Result<BetheEvaluation> {
    bethe_terms(nfg, &beta.to_f64(), t)
}

/// `-(1/M) log g(c)` for a valid configuration of an M-cover, which equals `U_B(phi_M(c))`.
pub fn bethe_energy_from_cover(spec: &CoverSpec<'_>, cover: &Cover, config: &Configuration) -> Result<f64> {
    cover.nfg.check_configuration(config).map_err(|_| Error::InvalidConfiguration)?;
    let mut log_g = 0.0;
    for cf in 0..cover.nfg.factors().len() {
        let v = cover.nfg.factor(cf).table.value(cover.nfg.local_index(cf, &config.0));
        if v == 0.0 {
            return Err(Error::ZeroGlobalValue);
        }
        log_g += v.ln();
    }
    let energy = -log_g / spec.degree() as f64;
    debug_assert!({
        let beta = phi_m(spec, cover, config)?;
        let u = bethe_terms_exact(spec.base(), &beta, 1.0)?.u_bethe;
        (u - energy).abs() <= 1e-12 * (1.0 + energy.abs())
    });
    Ok(energy)
}

/// `Z_{B,M}^M` (the average cover partition function) and its M-th root.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeMPartition {
    pub m: u32,
    pub temperature: f64,
    /// Exact pre-root value when all terms are rational.
    pub exact_average: Option<BigRational>,
    pub average: f64,
    pub value: f64,
}

impl DegreeMPartition {
    fn new(m: u32, temperature: f64, exact_average: Option<BigRational>, average: f64) -> Self {
        let average = exact_average.as_ref().map_or(average, to_f64);
        DegreeMPartition { m, temperature, exact_average, average, value: average.powf(1.0 / m as f64) }
    }
}

/// Partition function of one cover, exact when the tables permit it.
enum CoverZ {
    Exact(BigRational),
    Float(f64),
}

fn exact_mode(nfg: &Nfg, t: f64) -> bool {
    t == 1.0 || nfg.is_indicator()
}

fn cover_partition(spec: &CoverSpec<'_>, t: f64, caps: &Caps) -> Result<CoverZ> {
    let base = spec.base();
    let m = spec.degree() as i64;
    if base.is_cycle_code() {
        let circ = (base.edges().len() as i64 - base.factors().len() as i64) * m + cover_component_count(spec) as i64;
        let z = BigInt::one() << circ as usize;
        return Ok(CoverZ::Exact(BigRational::from_integer(z)));
    }
    let cover = build_cover(spec)?;
    let nfg = &cover.nfg;
    if exact_mode(base, t) {
        let indicator = base.is_indicator();
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
        return Ok(CoverZ::Exact(if indicator { BigRational::from_integer(count.into()) } else { sum }));
    }
    let mut logs = Vec::new();
    for_each_valid(nfg, caps, &[], |_, positions| {
        let lg: f64 = positions.iter().enumerate().map(|(f, &p)| nfg.factor(f).table.values()[p].ln()).sum();
        logs.push(lg / t);
        ControlFlow::Continue(())
    })?;
    Ok(CoverZ::Float(log_sum_exp(logs).exp()))
}

const CHUNK: u64 = 2048;

/// `Z_{B,M}` as the M-th root of the average partition function over all M-covers.
///
/// Cycle codes use the circuit rank of each cover instead of enumerating configurations.
pub fn zbethe_m_enumeration(nfg: &Nfg, m: u32, t: f64, caps: &Caps) -> Result<DegreeMPartition> {
    check_temperature(t)?;
    let total = enumerate_covers(nfg, m, caps)?.len_total();
    let chunks: Vec<(BigRational, f64)> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut exact = BigRational::zero();
            let mut float = 0.0;
            for idx in c * CHUNK..((c + 1) * CHUNK).min(total) {
                match cover_partition(&cover_at(nfg, m, idx), t, caps)? {
                    CoverZ::Exact(z) => exact += z,
                    CoverZ::Float(z) => float += z,
                }
            }
            Ok((exact, float))
        })
        .collect::<Result<_>>()?;
    let count = BigRational::from_integer(count_covers(nfg, m).into());
    if exact_mode(nfg, t) || nfg.is_cycle_code() {
        let sum = chunks.into_iter().fold(BigRational::zero(), |acc, (z, _)| acc + z);
        Ok(DegreeMPartition::new(m, t, Some(sum / count), 0.0))
    } else {
        let sum: f64 = chunks.iter().map(|(_, z)| z).sum();
        Ok(DegreeMPartition::new(m, t, None, sum / to_f64(&count)))
    }
}

/// Monte Carlo estimate of the average cover partition function.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloPartition {
    pub m: u32,
    pub samples: u64,
    pub mean: f64,
    pub std_error: f64,
    pub value: f64,
}

/// Averages `Z_G` over `samples` seeded uniform random M-covers.
pub fn zbethe_m_monte_carlo(nfg: &Nfg, m: u32, t: f64, samples: u64, seed: u64, caps: &Caps) -> Result<MonteCarloPartition> {
    check_temperature(t)?;
    if samples < 2 {
        return Err(Error::InvalidArgument("Monte Carlo needs at least two samples".into()));
    }
    let chunks: Vec<(f64, f64)> = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                let spec = random_cover_with(nfg, m, &mut rng);
                let z = match cover_partition(&spec, t, caps)? {
                    CoverZ::Exact(z) => to_f64(&z),
                    CoverZ::Float(z) => z,
                };
                s1 += z;
                s2 += z * z;
            }
            Ok((s1, s2))
        })
        .collect::<Result<_>>()?;
    let (s1, s2) = chunks.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let n = samples as f64;
    let mean = s1 / n;
    let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(MonteCarloPartition { m, samples, mean, std_error: (var / n).sqrt(), value: mean.powf(1.0 / m as f64) })
}

/// `Z_{B,M}` from the sum over lift-realizable pseudo-marginals of
/// `exp(-(M/T) U_B(beta)) * C_M(beta)`, using the closed-form pre-image count.
pub fn zbethe_m_typesum(nfg: &Nfg, m: u32, t: f64, caps: &Caps) -> Result<DegreeMPartition> {
    check_temperature(t)?;
    let points = lattice_points(nfg, m, caps)?;
    let exact = exact_mode(nfg, t);
    let mut exact_sum = BigRational::zero();
    let mut terms = Vec::new();
    for beta in &points {
        let count = preimage_count_closedform(nfg, m, beta)?;
        if count.is_zero() {
            continue;
        }
        let scaled = scaled_counts(beta, m)?;
        if exact {
            let mut weight = count;
            if !nfg.is_indicator() {
                for (f, map) in scaled.factors.iter().enumerate() {
                    for (&i, &k) in map {
                        weight *= num_traits::pow(nfg.factor(f).table.exact_value(i), k as usize);
                    }
                }
            }
            exact_sum += weight;
        } else {
            let mut log_weight = to_f64(&count).ln();
            for (f, map) in scaled.factors.iter().enumerate() {
                for (&i, &k) in map {
                    log_weight += k as f64 * nfg.factor(f).table.value(i).ln() / t;
                }
            }
            terms.push(log_weight);
        }
    }
    if exact {
        Ok(DegreeMPartition::new(m, t, Some(exact_sum), 0.0))
    } else {
        Ok(DegreeMPartition::new(m, t, None, log_sum_exp(terms).exp()))
    }
}

fn check_temperature(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("temperature must be positive, got {t}")))
    }
}

/// Entries at or below this value count as boundary points.
pub const INTERIORITY_EPS: f64 = 1e-12;

/// Norm of the gradient of `F_B` projected onto the tangent space of the polytope's equality constraints.
pub fn stationarity_residual(nfg: &Nfg, beta: &Beta, t: f64) -> Result<f64> {
    beta.check_shape(nfg)?;
    let coords = BetheCoordinates::new(nfg);
    let x = coords.flatten(nfg, beta);
    check_interior(nfg, &coords, &x)?;
    let (a, b) = coords.constraints(nfg);
    let space = AffineSubspace::new(&a, &b);
    let grad = DVector::from_vec(coords.gradient(&x, t));
    Ok(space.reduce(&grad).norm())
}

/// Gradient of `F_B` in the coordinates of [`BetheCoordinates::new`].
pub fn bethe_gradient(nfg: &Nfg, beta: &Beta, t: f64) -> Result<Vec<f64>> {
    beta.check_shape(nfg)?;
    let coords = BetheCoordinates::new(nfg);
    let x = coords.flatten(nfg, beta);
    check_interior(nfg, &coords, &x)?;
    Ok(coords.gradient(&x, t))
}

fn check_interior(nfg: &Nfg, coords: &BetheCoordinates, x: &[f64]) -> Result<()> {
    for (f, vars) in coords.factor_vars.iter().enumerate() {
        for &(p, v) in vars {
            if x[v] <= INTERIORITY_EPS {
                let table = &nfg.factor(f).table;
                let assignment = crate::nfg::format_symbols(&table.decode(table.support()[p]));
                return Err(Error::BoundaryBeta { location: format!("{}[{assignment}]", nfg.factor(f).id), value: x[v] });
            }
        }
    }
    for (e, vars) in coords.edge_vars.iter().enumerate() {
        for (s, v) in vars.iter().enumerate() {
            if let Some(v) = v {
                if x[*v] <= INTERIORITY_EPS {
                    return Err(Error::BoundaryBeta { location: format!("{}={s}", nfg.edge(e).id), value: x[*v] });
                }
            }
        }
    }
    Ok(())
}

/// Distinct pseudo-marginal vectors realized by some M-cover, checked against the lattice points.
pub fn lift_realizable_check(nfg: &Nfg, m: u32, caps: &Caps) -> Result<bool> {
    let from_covers = crate::counting::lift_realizable_set(nfg, m, caps)?;
    let lattice: std::collections::BTreeSet<ExactBeta> = lattice_points(nfg, m, caps)?.into_iter().collect();
    Ok(from_covers == lattice)
}
