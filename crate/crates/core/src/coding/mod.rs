//! Codes as factor graphs, channels, and the blockwise and symbolwise decoders.

mod channel;
mod decoders;
mod matrix;

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::One;

use crate::beta::Beta;
use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::lp::solve_standard_form;
use crate::nfg::Nfg;

pub use channel::{absorb_channel, attach_channel, Channel, DecodingNfg};
pub use decoders::{bgcd, bgcd_degree_m, bmapd, decision_is_codeword, sgcd, sgcd_degree_m, smapd, DecodeResult};
pub use matrix::{check_represents_code, nfg_from_parity_check, symbol_edge_ids, CodeRepresentation, ParityCheckMatrix};

/// `omega_e = beta_{e,1}` for every half-edge.
pub fn fundamental_projection(nfg: &Nfg, beta: &Beta) -> Result<Vec<f64>> {
    beta.check_shape(nfg)?;
    nfg.half_edges()
        .into_iter()
        .map(|e| match nfg.edge(e).alphabet {
            2 => Ok(beta.edges[e][1]),
            _ => Err(Error::NonBinaryAlphabet(nfg.edge(e).id.clone())),
        })
        .collect()
}

/// True when some point of the local marginal polytope projects to `omega`.
pub fn in_fundamental_polytope(nfg: &Nfg, omega: &[f64]) -> Result<bool> {
    let half = nfg.half_edges();
    if omega.len() != half.len() {
        return Err(Error::LengthMismatch { expected: half.len(), found: omega.len() });
    }
    if let Some(&e) = half.iter().find(|&&e| nfg.edge(e).alphabet != 2) {
        return Err(Error::NonBinaryAlphabet(nfg.edge(e).id.clone()));
    }
    let coords = crate::bethe::BetheCoordinates::new(nfg);
    let (a, b) = coords.constraints(nfg);
    let mut rows: Vec<Vec<f64>> = a.row_iter().map(|r| r.iter().copied().collect()).collect();
    let mut rhs: Vec<f64> = b.iter().copied().collect();
    for (&e, &w) in half.iter().zip(omega) {
        let mut row = vec![0.0; coords.len()];
        row[coords.edge_vars[e][1].expect("full layout")] = 1.0;
        rows.push(row);
        rhs.push(w);
    }
    match solve_standard_form(&vec![0.0; coords.len()], &rows, &rhs) {
        Ok(_) => Ok(true),
        Err(Error::LpFailure(msg)) if msg.starts_with("infeasible") => Ok(false),
        Err(e) => Err(e),
    }
}

/// `Z_G = 2^(|E| - |F| + #components)` for a cycle code, without enumeration.
pub fn cycle_code_zgibbs(nfg: &Nfg) -> Result<BigUint> {
    if let Some(e) = nfg.edges().iter().find(|e| !e.is_full()) {
        return Err(Error::NotCycleCode(format!("half-edge `{}`", e.id)));
    }
    if let Some(f) = nfg.factors().iter().find(|f| !f.table.is_parity()) {
        return Err(Error::NotCycleCode(format!("factor `{}` is not a parity check", f.id)));
    }
    let circ = nfg.edges().len() + nfg.component_count() - nfg.factors().len();
    Ok(BigUint::one() << circ)
}

/// All codewords on the half-edges of `nfg`, by enumeration.
pub fn half_edge_code(nfg: &Nfg, caps: &Caps) -> Result<BTreeSet<Vec<u32>>> {
    let half = nfg.half_edges();
    let mut code = BTreeSet::new();
    crate::nfg::for_each_valid(nfg, caps, &[], |a, _| {
        code.insert(half.iter().map(|&e| a[e]).collect());
        std::ops::ControlFlow::Continue(())
    })?;
    Ok(code)
}
