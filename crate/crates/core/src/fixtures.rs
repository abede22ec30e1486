//! Small graphs used throughout the tests and the guide.

use crate::beta::{parse_beta, ExactBeta};
use crate::coding::ParityCheckMatrix;
use crate::nfg::{format::parse_nfg, Nfg};

pub const FIVE_CHECKS_NFG: &str = include_str!("../fixtures/five_checks.nfg");
pub const DUMBBELL_NFG: &str = include_str!("../fixtures/dumbbell.nfg");
pub const REGULAR36_PCM: &str = include_str!("../fixtures/regular36.pcm");
pub const FIVE_CHECKS_BETA: &str = include_str!("../fixtures/five_checks.beta");

/// Five parity checks with half-edges `e1` and `e4` and full edges `e2, e3, e5..e8`.
pub fn five_checks() -> Nfg {
    parse_nfg(FIVE_CHECKS_NFG).expect("fixture parses")
}

/// Two parity triangles joined by the bridge edge `e4`.
pub fn dumbbell() -> Nfg {
    parse_nfg(DUMBBELL_NFG).expect("fixture parses")
}

/// A (3,6)-regular parity-check matrix with 5 checks on 10 symbols.
pub fn regular36_matrix() -> ParityCheckMatrix {
    ParityCheckMatrix::parse(REGULAR36_PCM).expect("fixture parses")
}

/// The 2-cover pseudo-marginal of [`five_checks`] that puts `e1 = 0` and `e4 = 1`.
pub fn five_checks_beta(nfg: &Nfg) -> ExactBeta {
    parse_beta(nfg, FIVE_CHECKS_BETA).expect("fixture parses")
}
