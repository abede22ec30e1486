//! Pseudo-marginal vectors: per-factor weights over local assignments plus per-edge weights.

use std::collections::BTreeMap;
use std::fmt::{self, Display, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::gibbs::ConfigDistribution;
use crate::nfg::{format_symbols, parse_symbols, Configuration, LocalIndex, Nfg};
use crate::rational::{format_rational, lcm_of_denominators, parse_rational, to_f64};

/// A point `beta` with factor entries keyed by local assignment index.
///
/// Exact vectors omit zero factor entries so that equal vectors compare and hash equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PseudoMarginals<W> {
    pub factors: Vec<BTreeMap<LocalIndex, W>>,
    pub edges: Vec<Vec<W>>,
}

pub type ExactBeta = PseudoMarginals<BigRational>;
pub type Beta = PseudoMarginals<f64>;

impl<W: Clone + Zero> PseudoMarginals<W> {
    pub fn zeros(nfg: &Nfg) -> Self {
        PseudoMarginals {
            factors: vec![BTreeMap::new(); nfg.factors().len()],
            edges: nfg.edges().iter().map(|e| vec![W::zero(); e.alphabet as usize]).collect(),
        }
    }

    pub fn factor_weight(&self, f: usize, index: LocalIndex) -> W {
        self.factors[f].get(&index).cloned().unwrap_or_else(W::zero)
    }

    pub fn check_shape(&self, nfg: &Nfg) -> Result<()> {
        if self.factors.len() != nfg.factors().len() || self.edges.len() != nfg.edges().len() {
            return Err(Error::ShapeMismatch(format!(
                "beta has {} factors and {} edges, graph has {} and {}",
                self.factors.len(),
                self.edges.len(),
                nfg.factors().len(),
                nfg.edges().len()
            )));
        }
        for (e, w) in self.edges.iter().enumerate() {
            if w.len() != nfg.edge(e).alphabet as usize {
                return Err(Error::ShapeMismatch(format!("edge `{}` alphabet", nfg.edge(e).id)));
            }
        }
        for (f, map) in self.factors.iter().enumerate() {
            let size = nfg.factor(f).table.space_size().unwrap_or(u128::MAX);
            if map.keys().any(|&i| i as u128 >= size) {
                return Err(Error::ShapeMismatch(format!("factor `{}` assignment", nfg.factor(f).id)));
            }
        }
        Ok(())
    }
}

impl ExactBeta {
    /// Point mass at the local restrictions of a configuration.
    pub fn vertex(nfg: &Nfg, config: &Configuration) -> Result<Self> {
        nfg.check_configuration(config)?;
        let mut beta = Self::zeros(nfg);
        for f in 0..nfg.factors().len() {
            beta.factors[f].insert(nfg.local_index(f, &config.0), BigRational::one());
        }
        for (e, &s) in config.0.iter().enumerate() {
            beta.edges[e][s as usize] = BigRational::one();
        }
        Ok(beta)
    }

    /// From integer counts with common denominator `m`.
    pub fn from_counts(
        factors: Vec<BTreeMap<LocalIndex, u32>>,
        edges: Vec<Vec<u32>>,
        m: u32,
    ) -> Self {
        let q = |k: u32| BigRational::new(BigInt::from(k), BigInt::from(m));
        PseudoMarginals {
            factors: factors
                .into_iter()
                .map(|map| map.into_iter().filter(|(_, k)| *k > 0).map(|(i, k)| (i, q(k))).collect())
                .collect(),
            edges: edges.into_iter().map(|v| v.into_iter().map(q).collect()).collect(),
        }
    }

    pub fn to_f64(&self) -> Beta {
        PseudoMarginals {
            factors: self
                .factors
                .iter()
                .map(|m| m.iter().map(|(i, v)| (*i, to_f64(v))).collect())
                .collect(),
            edges: self.edges.iter().map(|v| v.iter().map(to_f64).collect()).collect(),
        }
    }

    /// Least common denominator of all entries.
    pub fn denominator(&self) -> BigInt {
        lcm_of_denominators(self.factors.iter().flat_map(|m| m.values()).chain(self.edges.iter().flatten()))
    }

    /// Drops zero factor entries.
    pub fn canonical(mut self) -> Self {
        for m in &mut self.factors {
            m.retain(|_, v| !v.is_zero());
        }
        self
    }
}

impl Beta {
    /// Marginals of a distribution over configurations; always lies in the local marginal polytope.
    pub fn from_distribution(nfg: &Nfg, p: &ConfigDistribution) -> Result<Self> {
        let mut beta = Self::zeros(nfg);
        for (f, factor) in nfg.factors().iter().enumerate() {
            for &i in factor.table.support() {
                beta.factors[f].insert(i, 0.0);
            }
        }
        for (config, prob) in p.entries() {
            nfg.check_configuration(config)?;
            for f in 0..nfg.factors().len() {
                *beta.factors[f].entry(nfg.local_index(f, &config.0)).or_insert(0.0) += prob;
            }
            for (e, &s) in config.0.iter().enumerate() {
                beta.edges[e][s as usize] += prob;
            }
        }
        Ok(beta)
    }

    /// Per-factor vectors aligned with each factor's support.
    pub fn support_vectors(&self, nfg: &Nfg) -> Vec<Vec<f64>> {
        nfg.factors()
            .iter()
            .enumerate()
            .map(|(f, factor)| factor.table.support().iter().map(|&i| self.factor_weight(f, i)).collect())
            .collect()
    }

    /// Inverse of [`Beta::support_vectors`].
    pub fn from_support_vectors(nfg: &Nfg, factors: &[Vec<f64>], edges: Vec<Vec<f64>>) -> Self {
        PseudoMarginals {
            factors: nfg
                .factors()
                .iter()
                .zip(factors)
                .map(|(factor, v)| factor.table.support().iter().copied().zip(v.iter().copied()).collect())
                .collect(),
            edges,
        }
    }

    pub fn max_abs_diff(&self, other: &Beta) -> f64 {
        let mut worst = 0.0f64;
        for (a, b) in self.factors.iter().zip(&other.factors) {
            for k in a.keys().chain(b.keys()) {
                let x = a.get(k).copied().unwrap_or(0.0);
                let y = b.get(k).copied().unwrap_or(0.0);
                worst = worst.max((x - y).abs());
            }
        }
        for (a, b) in self.edges.iter().zip(&other.edges) {
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x - y).abs());
            }
        }
        worst
    }
}

/// One failed constraint of the local marginal polytope.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Negative { location: String },
    OutsideSupport { factor: String, assignment: String },
    FactorSum { factor: String },
    EdgeSum { edge: String },
    Marginal { factor: String, edge: String, symbol: u32 },
}

impl Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Negative { location } => write!(f, "negative weight at {location}"),
            Violation::OutsideSupport { factor, assignment } => {
                write!(f, "weight on {assignment} outside the local code of {factor}")
            }
            Violation::FactorSum { factor } => write!(f, "weights of {factor} do not sum to one"),
            Violation::EdgeSum { edge } => write!(f, "weights of {edge} do not sum to one"),
            Violation::Marginal { factor, edge, symbol } => {
                write!(f, "marginal of {factor} on {edge}={symbol} disagrees with the edge")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConsistencyReport {
    pub violations: Vec<Violation>,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the simplex and edge-consistency constraints within `tol` (pass zero for exact checks).
pub fn check_local_consistency<W>(nfg: &Nfg, beta: &PseudoMarginals<W>, tol: &W) -> Result<ConsistencyReport>
where
    W: Clone + Signed + PartialOrd,
{
    beta.check_shape(nfg)?;
    let mut violations = Vec::new();
    let off = |a: &W, b: &W| (a.clone() - b.clone()).abs() > *tol;
    for (f, factor) in nfg.factors().iter().enumerate() {
        let mut sum = W::zero();
        let mut marginals: Vec<Vec<W>> = factor
            .edges
            .iter()
            .map(|&e| vec![W::zero(); nfg.edge(e).alphabet as usize])
            .collect();
        for (&i, w) in &beta.factors[f] {
            if w.is_negative() {
                violations.push(Violation::Negative {
                    location: format!("{}[{}]", factor.id, format_symbols(&factor.table.decode(i))),
                });
            }
            if !w.is_zero() && factor.table.position(i).is_none() {
                violations.push(Violation::OutsideSupport {
                    factor: factor.id.clone(),
                    assignment: format_symbols(&factor.table.decode(i)),
                });
            }
            sum = sum + w.clone();
            for (slot, m) in marginals.iter_mut().enumerate() {
                let s = factor.table.symbol_at(i, slot) as usize;
                m[s] = m[s].clone() + w.clone();
            }
        }
        if off(&sum, &W::one()) {
            violations.push(Violation::FactorSum { factor: factor.id.clone() });
        }
        for (slot, &e) in factor.edges.iter().enumerate() {
            for (s, m) in marginals[slot].iter().enumerate() {
                if off(m, &beta.edges[e][s]) {
                    violations.push(Violation::Marginal {
                        factor: factor.id.clone(),
                        edge: nfg.edge(e).id.clone(),
                        symbol: s as u32,
                    });
                }
            }
        }
    }
    for (e, weights) in beta.edges.iter().enumerate() {
        let mut sum = W::zero();
        for (s, w) in weights.iter().enumerate() {
            if w.is_negative() {
                violations.push(Violation::Negative { location: format!("{}={s}", nfg.edge(e).id) });
            }
            sum = sum + w.clone();
        }
        if off(&sum, &W::one()) {
            violations.push(Violation::EdgeSum { edge: nfg.edge(e).id.clone() });
        }
    }
    Ok(ConsistencyReport { violations })
}

/// Parses `beta <factor|edge> <assignment> <value>` lines; unlisted entries are zero.
pub fn parse_beta(nfg: &Nfg, text: &str) -> Result<ExactBeta> {
    let mut beta = ExactBeta::zeros(nfg);
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let ["beta", name, assignment, value] = tokens[..] else {
            return Err(Error::parse(line, "expected `beta <factor|edge> <assignment> <value>`"));
        };
        let value = parse_rational(value).ok_or_else(|| Error::parse(line, format!("bad value `{value}`")))?;
        let bad = || Error::parse(line, format!("bad assignment `{assignment}`"));
        if let Ok(f) = nfg.factor_index(name) {
            let table = &nfg.factor(f).table;
            let symbols = parse_symbols(assignment, table.degree()).ok_or_else(bad)?;
            if symbols.len() != table.degree() || symbols.iter().zip(table.radices()).any(|(s, r)| s >= r) {
                return Err(Error::parse(line, format!("assignment `{assignment}` does not fit `{name}`")));
            }
            beta.factors[f].insert(table.encode(&symbols), value);
        } else if let Ok(e) = nfg.edge_index(name) {
            let symbols = parse_symbols(assignment, 1).ok_or_else(bad)?;
            match symbols[..] {
                [s] if s < nfg.edge(e).alphabet => beta.edges[e][s as usize] = value,
                _ => return Err(Error::parse(line, format!("bad symbol `{assignment}` for `{name}`"))),
            }
        } else {
            return Err(Error::parse(line, format!("unknown factor or edge `{name}`")));
        }
    }
    Ok(beta.canonical())
}

/// Renders exact pseudo-marginals, factors first, zero entries omitted.
pub fn emit_beta(nfg: &Nfg, beta: &ExactBeta) -> String {
    emit_with(nfg, beta, format_rational, |v| v.is_zero())
}

/// Renders floating-point pseudo-marginals.
pub fn emit_beta_f64(nfg: &Nfg, beta: &Beta) -> String {
    emit_with(nfg, beta, |v| format!("{v}"), |v| *v == 0.0)
}

fn emit_with<W>(nfg: &Nfg, beta: &PseudoMarginals<W>, show: impl Fn(&W) -> String, zero: impl Fn(&W) -> bool) -> String {
    let mut out = String::new();
    for (f, map) in beta.factors.iter().enumerate() {
        let factor = nfg.factor(f);
        for (&i, w) in map {
            if !zero(w) {
                let _ = writeln!(out, "beta {} {} {}", factor.id, format_symbols(&factor.table.decode(i)), show(w));
            }
        }
    }
    for (e, weights) in beta.edges.iter().enumerate() {
        for (s, w) in weights.iter().enumerate() {
            if !zero(w) {
                let _ = writeln!(out, "beta {} {} {}", nfg.edge(e).id, s, show(w));
            }
        }
    }
    out
}
