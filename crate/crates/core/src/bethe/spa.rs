use crate::beta::Beta;
use crate::error::{Error, Result};
use crate::nfg::{EdgeKind, Nfg};

#[derive(Debug, Clone, PartialEq)]
pub struct SpaOptions {
    pub max_iters: usize,
    /// Weight of the previous message: `new = (1 - d) * update + d * old`.
    pub damping: f64,
    /// Converged once the largest message change is at most this.
    pub tol: f64,
    pub temperature: f64,
    /// Record `(iteration, residual, F_B)` after every sweep.
    pub trace: bool,
}

impl Default for SpaOptions {
    fn default() -> Self {
        SpaOptions { max_iters: 1000, damping: 0.0, tol: 1e-12, temperature: 1.0, trace: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub iteration: usize,
    pub residual: f64,
    pub f_bethe: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaState {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// Factor-to-edge messages, indexed by factor and slot.
    pub messages: Vec<Vec<Vec<f64>>>,
    pub trace: Vec<TracePoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaResult {
    pub state: SpaState,
    pub beliefs: Beta,
}

struct Local {
    assignments: Vec<Vec<u32>>,
    weights: Vec<f64>,
}

/// Flooding sum-product from uniform messages.
pub fn sum_product(nfg: &Nfg, opts: &SpaOptions) -> Result<SpaResult> {
    if !(opts.temperature > 0.0 && opts.temperature.is_finite()) {
        return Err(Error::InvalidArgument("sum-product needs a positive temperature".into()));
    }
    if !(0.0..1.0).contains(&opts.damping) {
        return Err(Error::InvalidArgument("damping must lie in [0, 1)".into()));
    }
    let locals: Vec<Local> = nfg
        .factors()
        .iter()
        .map(|f| Local {
            assignments: f.table.support().iter().map(|&i| f.table.decode(i)).collect(),
            weights: f.table.values().iter().map(|v| v.powf(1.0 / opts.temperature)).collect(),
        })
        .collect();
    let mut messages: Vec<Vec<Vec<f64>>> = nfg
        .factors()
        .iter()
        .map(|f| {
            f.edges
                .iter()
                .map(|&e| {
                    let q = nfg.edge(e).alphabet as usize;
                    vec![1.0 / q as f64; q]
                })
                .collect()
        })
        .collect();
    let mut state = SpaState { iterations: 0, residual: f64::INFINITY, converged: false, messages: Vec::new(), trace: Vec::new() };
    for iter in 1..=opts.max_iters {
        let mut next = messages.clone();
        let mut residual = 0.0f64;
        for (f, factor) in nfg.factors().iter().enumerate() {
            let incoming = incoming_messages(nfg, &messages, f);
            for (slot, &e) in factor.edges.iter().enumerate() {
                let mut out = vec![0.0; nfg.edge(e).alphabet as usize];
                for (a, &w) in locals[f].assignments.iter().zip(&locals[f].weights) {
                    let prod: f64 = (0..a.len()).filter(|&j| j != slot).map(|j| incoming[j][a[j] as usize]).product();
                    out[a[slot] as usize] += w * prod;
                }
                let sum: f64 = out.iter().sum();
                if !(sum > 0.0 && sum.is_finite()) {
                    state.iterations = iter;
                    state.messages = messages;
                    let beliefs = assemble_beliefs(nfg, &locals, &state.messages);
                    return Ok(SpaResult { state, beliefs });
                }
                for (o, old) in out.iter_mut().zip(&messages[f][slot]) {
                    *o = (1.0 - opts.damping) * *o / sum + opts.damping * old;
                    residual = residual.max((*o - old).abs());
                }
                next[f][slot] = out;
            }
        }
        messages = next;
        state.iterations = iter;
        state.residual = residual;
        if opts.trace {
            let beliefs = assemble_beliefs(nfg, &locals, &messages);
            let f_bethe = super::bethe_terms(nfg, &beliefs, opts.temperature).map_or(f64::NAN, |ev| ev.f_bethe);
            state.trace.push(TracePoint { iteration: iter, residual, f_bethe });
        }
        if residual <= opts.tol {
            state.converged = true;
            break;
        }
    }
    state.messages = messages;
    let beliefs = assemble_beliefs(nfg, &locals, &state.messages);
    Ok(SpaResult { state, beliefs })
}

/// Messages arriving at factor `f` along each of its slots; half-edges send all-ones.
fn incoming_messages(nfg: &Nfg, messages: &[Vec<Vec<f64>>], f: usize) -> Vec<Vec<f64>> {
    nfg.factor(f)
        .edges
        .iter()
        .map(|&e| {
            let edge = nfg.edge(e);
            match edge.kind {
                EdgeKind::Half => vec![1.0; edge.alphabet as usize],
                EdgeKind::Full => {
                    let other = edge.ends.iter().find(|end| end.factor != f).expect("full edge has two ends");
                    messages[other.factor][other.slot].clone()
                }
            }
        })
        .collect()
}

fn normalize(v: &mut [f64]) {
    let sum: f64 = v.iter().sum();
    if sum > 0.0 {
        v.iter_mut().for_each(|x| *x /= sum);
    }
}

fn assemble_beliefs(nfg: &Nfg, locals: &[Local], messages: &[Vec<Vec<f64>>]) -> Beta {
    let mut beta = Beta::zeros(nfg);
    for (f, factor) in nfg.factors().iter().enumerate() {
        let incoming = incoming_messages(nfg, messages, f);
        let mut weights: Vec<f64> = locals[f]
            .assignments
            .iter()
            .zip(&locals[f].weights)
            .map(|(a, &w)| w * a.iter().enumerate().map(|(j, &s)| incoming[j][s as usize]).product::<f64>())
            .collect();
        normalize(&mut weights);
        for (&i, w) in factor.table.support().iter().zip(weights) {
            beta.factors[f].insert(i, w);
        }
    }
    for (e, edge) in nfg.edges().iter().enumerate() {
        let mut b = vec![1.0; edge.alphabet as usize];
        for end in &edge.ends {
            b.iter_mut().zip(&messages[end.factor][end.slot]).for_each(|(x, m)| *x *= m);
        }
        normalize(&mut b);
        beta.edges[e] = b;
    }
    beta
}
