//! Closed-form induced Bethe entropy of regular LDPC codes along the all-equal diagonal.
//!
//! For a `(d_L, d_R)`-regular code and tilt `s`,
//! `theta(s) = log sum_{w even} C(d_R, w) e^{s w}`, `omega(s) = theta'(s) / d_R` and
//! `h(s) = -(d_L - 1) H(omega) - d_L s omega + (d_L / d_R) theta(s)` per code symbol.

use std::collections::BTreeMap;
use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::gibbs::{entropy, log_sum_exp};

/// Second differences within this of zero count as flat.
pub const CURVATURE_THRESHOLD: f64 = 1e-9;
const BISECTION_TOL: f64 = 1e-12;

fn check_dr(d_r: u32) -> Result<()> {
    if d_r < 2 {
        return Err(Error::InvalidArgument(format!("d_R must be at least 2, got {d_r}")));
    }
    Ok(())
}

/// Log-weights `log C(d_R, w) + s w` of the even weights `w`.
fn tilted_log_weights(d_r: u32, s: f64) -> Vec<(f64, f64)> {
    (0..=d_r)
        .step_by(2)
        .map(|w| (w as f64, ln_binomial(d_r as u64, w as u64) + s * w as f64))
        .collect()
}

/// Mean and variance of the weight under the tilted even-weight distribution.
fn tilted_moments(d_r: u32, s: f64) -> (f64, f64) {
    let terms = tilted_log_weights(d_r, s);
    let lse = log_sum_exp(terms.iter().map(|t| t.1));
    let (mut mean, mut second) = (0.0, 0.0);
    for &(w, l) in &terms {
        let p = (l - lse).exp();
        mean += p * w;
        second += p * w * w;
    }
    (mean, (second - mean * mean).max(0.0))
}

pub fn theta(d_r: u32, s: f64) -> Result<f64> {
    check_dr(d_r)?;
    Ok(log_sum_exp(tilted_log_weights(d_r, s).into_iter().map(|t| t.1)))
}

pub fn omega_of_s(d_r: u32, s: f64) -> Result<f64> {
    check_dr(d_r)?;
    Ok(tilted_moments(d_r, s).0 / d_r as f64)
}

/// `d omega / d s = Var(w) / d_R`.
pub fn omega_derivative(d_r: u32, s: f64) -> Result<f64> {
    check_dr(d_r)?;
    Ok(tilted_moments(d_r, s).1 / d_r as f64)
}

/// Inverse of [`omega_of_s`] by bisection, for `omega` in `(0, 1)`.
pub fn s_of_omega(d_r: u32, omega: f64) -> Result<f64> {
    check_dr(d_r)?;
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::InvalidArgument(format!("omega must lie in (0, 1), got {omega}")));
    }
    let f = |s: f64| tilted_moments(d_r, s).0 / d_r as f64 - omega;
    let (mut lo, mut hi) = (-1.0, 1.0);
    while f(lo) > 0.0 {
        lo *= 2.0;
        if lo < -1e6 {
            return Err(Error::InvalidArgument(format!("omega {omega} is below the reachable range")));
        }
    }
    while f(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::InvalidArgument(format!("omega {omega} is above the reachable range")));
        }
    }
    while hi - lo > BISECTION_TOL * (1.0 + lo.abs().max(hi.abs())) {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Binary entropy in nats.
pub fn binary_entropy(p: f64) -> f64 {
    entropy([p, 1.0 - p])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularCurvePoint {
    pub s: f64,
    pub omega: f64,
    /// Per-symbol induced Bethe entropy in nats.
    pub h: f64,
    /// Numerical second derivative of `h` with respect to `omega`, when available.
    pub d2h: Option<f64>,
}

impl RegularCurvePoint {
    pub fn h_bits(&self) -> f64 {
        self.h / std::f64::consts::LN_2
    }
}

fn check_degrees(d_l: u32, d_r: u32) -> Result<()> {
    if !(2 <= d_l && d_l < d_r) {
        return Err(Error::InvalidArgument(format!("need 2 <= d_L < d_R, got ({d_l}, {d_r})")));
    }
    Ok(())
}

pub fn h_curve(d_l: u32, d_r: u32, s: f64) -> Result<RegularCurvePoint> {
    check_degrees(d_l, d_r)?;
    let omega = omega_of_s(d_r, s)?;
    let (dl, dr) = (d_l as f64, d_r as f64);
    let h = -(dl - 1.0) * binary_entropy(omega) - dl * s * omega + dl / dr * theta(d_r, s)?;
    Ok(RegularCurvePoint { s, omega, h, d2h: None })
}

/// `d^2 h / d omega^2 = (d_L - 1) / (omega (1 - omega)) - d_L / omega'(s)`.
pub fn d2h_domega2(d_l: u32, d_r: u32, s: f64) -> Result<f64> {
    check_degrees(d_l, d_r)?;
    let omega = omega_of_s(d_r, s)?;
    Ok((d_l as f64 - 1.0) / (omega * (1.0 - omega)) - d_l as f64 / omega_derivative(d_r, s)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curvature {
    Convex,
    Concave,
    Flat,
}

/// Shape findings for one `(d_L, d_R)` pair on a sampled grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeReport {
    pub d_l: u32,
    pub d_r: u32,
    /// `h` at the sample with the smallest `omega`.
    pub h_at_min_omega: f64,
    pub min_omega: f64,
    pub negative_near_zero: bool,
    pub nonnegative: bool,
    /// Maximal `omega` intervals of constant curvature sign.
    pub regions: Vec<(Curvature, f64, f64)>,
    pub peak: RegularCurvePoint,
}

impl ShapeReport {
    /// Curvature of the region containing `omega`, if sampled.
    pub fn curvature_at(&self, omega: f64) -> Option<Curvature> {
        self.regions.iter().find(|(_, lo, hi)| *lo <= omega && omega <= *hi).map(|r| r.0)
    }

    pub fn is_concave(&self) -> bool {
        self.regions.iter().all(|r| r.0 != Curvature::Convex)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "d_l={}\nd_r={}", self.d_l, self.d_r);
        let _ = writeln!(out, "min_omega={:.6e}\nh_at_min_omega={:.6e}", self.min_omega, self.h_at_min_omega);
        let _ = writeln!(out, "negative_near_zero={}\nnonnegative={}", self.negative_near_zero, self.nonnegative);
        for (c, lo, hi) in &self.regions {
            let name = match c {
                Curvature::Convex => "convex",
                Curvature::Concave => "concave",
                Curvature::Flat => "flat",
            };
            let _ = writeln!(out, "region={name} omega=[{lo:.6},{hi:.6}]");
        }
        let _ = writeln!(out, "peak_omega={:.6}\npeak_h_bits={:.10}", self.peak.omega, self.peak.h_bits());
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveScan {
    pub points: Vec<RegularCurvePoint>,
    pub report: ShapeReport,
}

/// Second difference of `h` in `omega` on the nonuniform stencil `i - k, i, i + k`.
fn second_difference(points: &[RegularCurvePoint], i: usize, k: usize) -> Option<f64> {
    let (a, b, c) = (points.get(i.checked_sub(k)?)?, &points[i], points.get(i + k)?);
    let left = (b.h - a.h) / (b.omega - a.omega);
    let right = (c.h - b.h) / (c.omega - b.omega);
    Some(2.0 * (right - left) / (c.omega - a.omega))
}

/// Samples `h` on a uniform `s` grid and classifies its shape as a function of `omega`.
pub fn curve_scan(d_l: u32, d_r: u32, s_min: f64, s_max: f64, steps: usize) -> Result<CurveScan> {
    check_degrees(d_l, d_r)?;
    if steps < 3 || !(s_min < s_max) {
        return Err(Error::InvalidArgument("need at least 3 steps and s_min < s_max".into()));
    }
    let mut points: Vec<RegularCurvePoint> = (0..steps)
        .into_par_iter()
        .map(|i| h_curve(d_l, d_r, s_min + (s_max - s_min) * i as f64 / (steps - 1) as f64))
        .collect::<Result<_>>()?;
    let d2: Vec<Option<f64>> = (0..steps)
        .map(|i| match (second_difference(&points, i, 1), second_difference(&points, i, 2)) {
            (Some(d1), Some(d2)) => Some((4.0 * d1 - d2) / 3.0),
            (d1, _) => d1,
        })
        .collect();
    for (p, d) in points.iter_mut().zip(&d2) {
        p.d2h = *d;
    }

    let mut regions: Vec<(Curvature, f64, f64)> = Vec::new();
    for p in &points {
        let Some(d) = p.d2h else { continue };
        let c = if d > CURVATURE_THRESHOLD {
            Curvature::Convex
        } else if d < -CURVATURE_THRESHOLD {
            Curvature::Concave
        } else {
            Curvature::Flat
        };
        match regions.last_mut() {
            Some(last) if last.0 == c => last.2 = p.omega,
            _ => regions.push((c, p.omega, p.omega)),
        }
    }
    let first = points[0];
    let peak = *points.iter().max_by(|a, b| a.h.total_cmp(&b.h)).expect("non-empty grid");
    let report = ShapeReport {
        d_l,
        d_r,
        h_at_min_omega: first.h,
        min_omega: first.omega,
        negative_near_zero: first.h < 0.0,
        nonnegative: points.iter().all(|p| p.h >= -1e-12),
        regions,
        peak,
    };
    Ok(CurveScan { points, report })
}

/// CSV with columns `s,omega,h_nats,h_bits,d2h_domega2`.
pub fn to_csv(points: &[RegularCurvePoint]) -> String {
    let mut out = String::from("s,omega,h_nats,h_bits,d2h_domega2\n");
    for p in points {
        let d2 = p.d2h.map_or(String::new(), |d| format!("{d:.12e}"));
        let _ = writeln!(out, "{:.12},{:.15e},{:.15e},{:.15e},{d2}", p.s, p.omega, p.h, p.h_bits());
    }
    out
}

/// A `(d_L, d_R)`-regular matrix from a uniformly random matching of `n d_L` symbol sockets to
/// `n d_L / d_R` check sockets. Repeated connections cancel modulo two.
pub fn random_regular_matrix(d_l: u32, d_r: u32, n: usize, rng: &mut impl rand::Rng) -> Result<Vec<Vec<u8>>> {
    check_degrees(d_l, d_r)?;
    let sockets = n * d_l as usize;
    if sockets % d_r as usize != 0 {
        return Err(Error::InvalidArgument(format!("n * d_L = {sockets} is not a multiple of d_R")));
    }
    let m = sockets / d_r as usize;
    let mut perm: Vec<usize> = (0..sockets).collect();
    perm.shuffle(rng);
    let mut rows = vec![vec![0u8; n]; m];
    for (k, &p) in perm.iter().enumerate() {
        rows[p / d_r as usize][k / d_l as usize] ^= 1;
    }
    Ok(rows)
}

/// Average number of codewords of each weight over seeded random regular matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleEnumerator {
    pub n: usize,
    pub samples: usize,
    /// `(weight, average count)` for every weight with a nonzero average.
    pub average: Vec<(usize, f64)>,
}

impl EnsembleEnumerator {
    /// `(omega, log(average count) / n, h(omega))` for weights strictly between 0 and `n`.
    pub fn compare(&self, d_l: u32, d_r: u32) -> Result<Vec<(f64, f64, f64)>> {
        self.average
            .iter()
            .filter(|(w, _)| *w > 0 && *w < self.n)
            .map(|&(w, a)| {
                let omega = w as f64 / self.n as f64;
                let h = h_curve(d_l, d_r, s_of_omega(d_r, omega)?)?.h;
                Ok((omega, a.ln() / self.n as f64, h))
            })
            .collect()
    }
}

pub fn ensemble_enumerator(d_l: u32, d_r: u32, n: usize, samples: usize, seed: u64) -> Result<EnsembleEnumerator> {
    if n > 20 {
        return Err(Error::CapExceeded { what: "ensemble codeword search", size: format!("2^{n}"), cap: 1 << 20 });
    }
    let counts: Vec<Vec<u64>> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let rows = random_regular_matrix(d_l, d_r, n, &mut rng)?;
            let mut hist = vec![0u64; n + 1];
            weight_histogram(&rows, n, &mut hist);
            Ok(hist)
        })
        .collect::<Result<_>>()?;
    let mut total: BTreeMap<usize, u64> = BTreeMap::new();
    for hist in &counts {
        for (w, &c) in hist.iter().enumerate() {
            *total.entry(w).or_default() += c;
        }
    }
    let average = total.into_iter().filter(|&(_, c)| c > 0).map(|(w, c)| (w, c as f64 / samples as f64)).collect();
    Ok(EnsembleEnumerator { n, samples, average })
}

fn weight_histogram(rows: &[Vec<u8>], n: usize, hist: &mut [u64]) {
    for bits in 0..1u64 << n {
        let ok = rows.iter().all(|r| (0..n).filter(|&i| r[i] == 1 && (bits >> i) & 1 == 1).count() % 2 == 0);
        if ok {
            hist[bits.count_ones() as usize] += 1;
        }
    }
}
