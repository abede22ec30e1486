//! Depth-first enumeration of valid configurations, pruning on zero table entries.

use std::ops::ControlFlow;

use num_rational::BigRational;
use num_traits::One;

use super::{Configuration, Nfg, Symbol};
use crate::caps::Caps;
use crate::error::{Error, Result};

/// A configuration with nonzero global value.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidConfiguration {
    pub config: Configuration,
    /// Position of each factor's local assignment inside its support.
    pub positions: Vec<usize>,
    pub value: f64,
}

impl ValidConfiguration {
    pub fn exact_value(&self, nfg: &Nfg) -> BigRational {
        self.positions
            .iter()
            .enumerate()
            .fold(BigRational::one(), |acc, (f, &p)| {
                acc * &nfg.factor(f).table.exact_values()[p]
            })
    }
}

/// Visits every valid configuration in lexicographic order over sorted edge ids.
///
/// `prefix` fixes the symbols of the first `prefix.len()` edges, which lets callers
/// split the space into disjoint parts. The visitor receives the full assignment and
/// the per-factor support positions.
pub fn for_each_valid<F>(nfg: &Nfg, caps: &Caps, prefix: &[Symbol], mut visit: F) -> Result<()>
where
    F: FnMut(&[Symbol], &[usize]) -> ControlFlow<()>,
{
    caps.check_config(nfg.configuration_space_size())?;
    let n = nfg.edges().len();
    if prefix.len() > n {
        return Err(Error::ShapeMismatch("prefix longer than the edge list".into()));
    }
    for (e, &s) in prefix.iter().enumerate() {
        if s >= nfg.edge(e).alphabet {
            return Err(Error::OutOfAlphabet { edge: nfg.edge(e).id.clone(), symbol: s });
        }
    }
    let mut closes_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (f, factor) in nfg.factors().iter().enumerate() {
        let last = *factor.edges.iter().max().expect("factors have edges");
        closes_at[last].push(f);
    }
    let mut search = Search {
        nfg,
        closes_at,
        assignment: vec![0; n],
        positions: vec![0; nfg.factors().len()],
        prefix,
    };
    let _ = search.descend(0, &mut visit);
    Ok(())
}

struct Search<'a> {
    nfg: &'a Nfg,
    closes_at: Vec<Vec<usize>>,
    assignment: Vec<Symbol>,
    positions: Vec<usize>,
    prefix: &'a [Symbol],
}

impl Search<'_> {
    fn descend<F>(&mut self, k: usize, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[Symbol], &[usize]) -> ControlFlow<()>,
    {
        if k == self.assignment.len() {
            return visit(&self.assignment, &self.positions);
        }
        let symbols = match self.prefix.get(k) {
            Some(&s) => s..s + 1,
            None => 0..self.nfg.edge(k).alphabet,
        };
        'symbol: for s in symbols {
            self.assignment[k] = s;
            for &f in &self.closes_at[k] {
                let index = self.nfg.local_index(f, &self.assignment);
                match self.nfg.factor(f).table.position(index) {
                    Some(p) => self.positions[f] = p,
                    None => continue 'symbol,
                }
            }
            self.descend(k + 1, visit)?;
        }
        ControlFlow::Continue(())
    }
}

/// All valid configurations with their global values, in lexicographic order.
pub fn enumerate_configurations(nfg: &Nfg, caps: &Caps) -> Result<Vec<ValidConfiguration>> {
    let mut out = Vec::new();
    for_each_valid(nfg, caps, &[], |assignment, positions| {
        let value = positions
            .iter()
            .enumerate()
            .map(|(f, &p)| nfg.factor(f).table.values()[p])
            .product();
        out.push(ValidConfiguration {
            config: Configuration(assignment.to_vec()),
            positions: positions.to_vec(),
            value,
        });
        ControlFlow::Continue(())
    })?;
    Ok(out)
}
