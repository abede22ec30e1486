//! Finite graph covers of normal factor graphs and the Bethe approximation.
//!
//! The crate computes Gibbs-side quantities exactly by enumeration, builds and enumerates
//! M-covers, counts pre-images of pseudo-marginal vectors, evaluates and minimizes the
//! Bethe free energy, runs sum-product, implements graph-cover decoders for codes, and
//! evaluates the closed-form Bethe entropy curves of regular LDPC codes.

pub mod bethe;
pub mod beta;
pub mod caps;
pub mod coding;
pub mod counting;
pub mod covers;
mod dsu;
pub mod error;
pub mod fixtures;
pub mod gibbs;
pub mod ldpc_curves;
mod linalg;
pub mod lp;
pub mod nfg;
pub mod rational;
pub mod types;

pub use caps::Caps;
pub use error::{Error, Result};
pub use nfg::{Configuration, Nfg, NfgBuilder, TableSpec};
