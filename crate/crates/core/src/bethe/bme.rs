use nalgebra::{DMatrix, DVector};

use crate::beta::Beta;
use crate::error::{Error, Result};
use crate::gibbs::{entropy, log_sum_exp};
use crate::linalg::pinv_solve;
use crate::nfg::{EdgeKind, Nfg};

const DUAL_TOL: f64 = 1e-12;
const DUAL_MAX_ITERS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct BmeResult {
    pub beta: Beta,
    /// Induced Bethe entropy `H_B(omega)` in nats.
    pub h_bethe: f64,
    /// Tilt multipliers per factor and slot. Repetition factors carrying a half-edge have
    /// none; slots pinned at 0 or 1 report `-inf` or `+inf`.
    pub duals: Vec<Option<Vec<f64>>>,
}

/// Maximum-Bethe-entropy completion of the half-edge marginals `omega`.
///
/// Supported graphs are binary codes in which every full edge touches a repetition factor
/// that carries a half-edge, so `omega` fixes every edge marginal and each remaining factor
/// is an independent maximum-entropy problem solved through its exponential-family dual.
pub fn bme_completion(nfg: &Nfg, omega: &[f64]) -> Result<BmeResult> {
    let half = nfg.half_edges();
    if omega.len() != half.len() {
        return Err(Error::LengthMismatch { expected: half.len(), found: omega.len() });
    }
    if let Some(e) = nfg.edges().iter().find(|e| e.alphabet != 2) {
        return Err(Error::NonBinaryAlphabet(e.id.clone()));
    }
    if !nfg.is_indicator() {
        return Err(Error::Unsupported("completion needs indicator factors".into()));
    }
    if let Some(w) = omega.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        return Err(Error::InfeasibleOmega(format!("entry {w} is outside [0, 1]")));
    }

    let mut edge_omega: Vec<Option<f64>> = vec![None; nfg.edges().len()];
    for (&e, &w) in half.iter().zip(omega) {
        edge_omega[e] = Some(w);
    }
    let mut anchored = vec![false; nfg.factors().len()];
    for (f, factor) in nfg.factors().iter().enumerate() {
        let halves: Vec<usize> = factor.edges.iter().copied().filter(|&e| !nfg.edge(e).is_full()).collect();
        if factor.table.is_repetition() && halves.len() == 1 {
            anchored[f] = true;
            let w = edge_omega[halves[0]].expect("half-edge marginal");
            for &e in &factor.edges {
                match edge_omega[e] {
                    Some(prev) if e != halves[0] && (prev - w).abs() > 0.0 => {
                        return Err(Error::InfeasibleOmega(format!("edge `{}` is tied to two symbols", nfg.edge(e).id)));
                    }
                    _ => edge_omega[e] = Some(w),
                }
            }
        }
    }
    if let Some(e) = nfg.edges().iter().zip(&edge_omega).find(|(_, w)| w.is_none()) {
        return Err(Error::Unsupported(format!(
            "marginal of edge `{}` is not fixed by a repetition factor with a half-edge",
            e.0.id
        )));
    }
    let edge_omega: Vec<f64> = edge_omega.into_iter().map(|w| w.expect("checked")).collect();

    let mut beta = Beta::zeros(nfg);
    let mut duals = Vec::with_capacity(nfg.factors().len());
    let mut h = 0.0;
    for (f, factor) in nfg.factors().iter().enumerate() {
        let targets: Vec<f64> = factor.edges.iter().map(|&e| edge_omega[e]).collect();
        let (weights, dual) = if anchored[f] {
            let w = targets[0];
            let weights = factor.table.support().iter().map(|&i| if factor.table.symbol_at(i, 0) == 1 { w } else { 1.0 - w });
            (weights.collect(), None)
        } else {
            let assignments: Vec<Vec<u32>> = factor.table.support().iter().map(|&i| factor.table.decode(i)).collect();
            let (weights, s) = max_entropy_tilt(&assignments, &targets)
                .map_err(|msg| Error::InfeasibleOmega(format!("factor `{}`: {msg}", factor.id)))?;
            (weights, Some(s))
        };
        h += entropy(weights.iter().copied());
        for (&i, w) in factor.table.support().iter().zip(weights) {
            beta.factors[f].insert(i, w);
        }
        duals.push(dual);
    }
    for (e, edge) in nfg.edges().iter().enumerate() {
        let w = edge_omega[e];
        beta.edges[e] = vec![1.0 - w, w];
        if edge.kind == EdgeKind::Full {
            h -= entropy([1.0 - w, w]);
        }
    }
    Ok(BmeResult { beta, h_bethe: h, duals })
}

/// Maximum-entropy distribution over binary `assignments` whose slot means equal `targets`,
/// of the form `exp(s . a)` normalized. Returns the weights and `s`.
pub(crate) fn max_entropy_tilt(assignments: &[Vec<u32>], targets: &[f64]) -> std::result::Result<(Vec<f64>, Vec<f64>), String> {
    let k = targets.len();
    let pinned: Vec<Option<u32>> = targets
        .iter()
        .map(|&w| if w == 0.0 { Some(0) } else if w == 1.0 { Some(1) } else { None })
        .collect();
    let live: Vec<usize> = (0..assignments.len())
        .filter(|&r| pinned.iter().enumerate().all(|(j, p)| p.is_none_or(|b| assignments[r][j] == b)))
        .collect();
    if live.is_empty() {
        return Err("no local codeword matches the pinned marginals".into());
    }
    let free: Vec<usize> = (0..k).filter(|&j| pinned[j].is_none()).collect();
    let features = DMatrix::from_fn(live.len(), free.len(), |r, c| assignments[live[r]][free[c]] as f64);
    let target = DVector::from_fn(free.len(), |c, _| targets[free[c]]);

    let dual = |s: &DVector<f64>| -> f64 { log_sum_exp((&features * s).iter().copied()) - s.dot(&target) };
    let probs = |s: &DVector<f64>| -> DVector<f64> {
        let logits = &features * s;
        let lse = log_sum_exp(logits.iter().copied());
        logits.map(|v| (v - lse).exp())
    };
    let mut s = DVector::zeros(free.len());
    let mut converged = free.is_empty();
    for _ in 0..DUAL_MAX_ITERS {
        if converged {
            break;
        }
        let p = probs(&s);
        let mean = features.tr_mul(&p);
        let grad = &mean - &target;
        if grad.amax() <= DUAL_TOL {
            converged = true;
            break;
        }
        let centered = DMatrix::from_fn(live.len(), free.len(), |r, c| features[(r, c)] - mean[c]);
        let weighted = DMatrix::from_fn(live.len(), free.len(), |r, c| p[r] * centered[(r, c)]);
        let hess = centered.tr_mul(&weighted);
        let step = -pinv_solve(&hess, &grad);
        let f0 = dual(&s);
        let slope = grad.dot(&step);
        let mut alpha = 1.0;
        while dual(&(&s + alpha * &step)) > f0 + 1e-4 * alpha * slope && alpha > 1e-12 {
            alpha *= 0.5;
        }
        let next = &s + alpha * &step;
        if next == s {
            break;
        }
        s = next;
    }
    if !converged {
        let mismatch = (features.tr_mul(&probs(&s)) - &target).amax();
        if !(mismatch <= DUAL_TOL) {
            return Err(format!("dual iteration did not match the marginals (mismatch {mismatch:e})"));
        }
    }
    let p = probs(&s);
    let mut weights = vec![0.0; assignments.len()];
    for (r, &row) in live.iter().enumerate() {
        weights[row] = p[r];
    }
    let mut full = vec![0.0; k];
    for (j, p) in pinned.iter().enumerate() {
        full[j] = match p {
            Some(0) => f64::NEG_INFINITY,
            Some(_) => f64::INFINITY,
            None => 0.0,
        };
    }
    for (c, &j) in free.iter().enumerate() {
        full[j] = s[c];
    }
    Ok((weights, full))
}
