//! Normal factor graphs: factors own ordered edge lists and local tables, variables live on edges.

mod enumerate;
pub mod format;
mod table;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;

use crate::error::{Error, Result};

pub use enumerate::{enumerate_configurations, for_each_valid, ValidConfiguration};
pub use table::{LocalIndex, LocalTable};

pub type Symbol = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Half,
    Full,
}

/// Attachment of an edge to a factor: the factor index and the slot in its incidence list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct End {
    pub factor: usize,
    pub slot: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub alphabet: u32,
    pub kind: EdgeKind,
    /// One end for half-edges, two for full edges with the smaller factor id first.
    pub ends: Vec<End>,
}

impl Edge {
    pub fn is_full(&self) -> bool {
        self.kind == EdgeKind::Full
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub id: String,
    pub edges: Vec<usize>,
    pub table: LocalTable,
}

/// Table description accepted by [`NfgBuilder::factor`].
#[derive(Debug, Clone)]
pub enum TableSpec {
    Parity,
    Repetition,
    Rows(Vec<(Vec<Symbol>, BigRational)>),
    Table(LocalTable),
}

/// An immutable normal factor graph with edges and factors sorted by identifier.
#[derive(Debug, Clone, PartialEq)]
pub struct Nfg {
    edges: Vec<Edge>,
    factors: Vec<Factor>,
    edge_lookup: BTreeMap<String, usize>,
    factor_lookup: BTreeMap<String, usize>,
}

/// One symbol per edge, indexed like [`Nfg::edges`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration(pub Vec<Symbol>);

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_symbols(&self.0))
    }
}

/// Digits run together when every symbol is below ten, comma separated otherwise.
pub fn format_symbols(symbols: &[Symbol]) -> String {
    if symbols.iter().all(|&s| s < 10) {
        symbols.iter().map(|s| char::from(b'0' + *s as u8)).collect()
    } else {
        symbols.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Inverse of [`format_symbols`] for an assignment of `len` symbols.
pub fn parse_symbols(text: &str, len: usize) -> Option<Vec<Symbol>> {
    if text.contains(',') {
        text.split(',').map(|s| s.trim().parse().ok()).collect()
    } else if len == 1 {
        text.parse().ok().map(|s| vec![s])
    } else {
        text.chars().map(|c| c.to_digit(10)).collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct NfgBuilder {
    alphabets: BTreeMap<String, u32>,
    declared: BTreeMap<String, Declared>,
    factors: Vec<(String, Vec<String>, TableSpec)>,
}

#[derive(Debug, Clone, PartialEq)]
enum Declared {
    Half,
    Full(String, String),
}

impl NfgBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Alphabet size of an edge; edges without one are binary.
    pub fn alphabet(&mut self, edge: &str, size: u32) -> &mut Self {
        self.alphabets.insert(edge.to_string(), size);
        self
    }

    pub fn half_edge(&mut self, edge: &str) -> &mut Self {
        self.declared.insert(edge.to_string(), Declared::Half);
        self
    }

    pub fn full_edge(&mut self, edge: &str, a: &str, b: &str) -> &mut Self {
        self.declared
            .insert(edge.to_string(), Declared::Full(a.to_string(), b.to_string()));
        self
    }

    pub fn factor(&mut self, id: &str, edges: &[&str], table: TableSpec) -> &mut Self {
        self.factors.push((
            id.to_string(),
            edges.iter().map(|e| e.to_string()).collect(),
            table,
        ));
        self
    }

    pub fn build(&self) -> Result<Nfg> {
        let mut incidence: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        let mut factor_ids = BTreeSet::new();
        for (id, edges, _) in &self.factors {
            if !factor_ids.insert(id.as_str()) {
                return Err(Error::InvalidNfg(format!("duplicate factor `{id}`")));
            }
            if edges.is_empty() {
                return Err(Error::InvalidNfg(format!("factor `{id}` has no edges")));
            }
            for e in edges {
                incidence.entry(e.as_str()).or_default().push(id.as_str());
            }
        }
        for e in self.declared.keys().chain(self.alphabets.keys()) {
            if !incidence.contains_key(e.as_str()) {
                return Err(Error::InvalidNfg(format!("edge `{e}` is not incident to any factor")));
            }
        }
        if let Some(clash) = incidence.keys().find(|e| factor_ids.contains(*e)) {
            return Err(Error::InvalidNfg(format!("`{clash}` names both an edge and a factor")));
        }

        let factor_lookup: BTreeMap<String, usize> = factor_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.to_string(), i))
            .collect();
        let edge_lookup: BTreeMap<String, usize> = incidence
            .keys()
            .enumerate()
            .map(|(i, id)| (id.to_string(), i))
            .collect();

        let mut edges = Vec::with_capacity(incidence.len());
        for (id, owners) in &incidence {
            let kind = match owners.len() {
                1 => EdgeKind::Half,
                2 if owners[0] == owners[1] => {
                    return Err(Error::InvalidNfg(format!("edge `{id}` is a self-loop")))
                }
                2 => EdgeKind::Full,
                n => {
                    return Err(Error::InvalidNfg(format!(
                        "edge `{id}` is incident to {n} factors"
                    )))
                }
            };
            match (self.declared.get(*id), kind) {
                (None, _) | (Some(Declared::Half), EdgeKind::Half) => {}
                (Some(Declared::Full(a, b)), EdgeKind::Full) => {
                    let mut declared = [a.as_str(), b.as_str()];
                    let mut actual = [owners[0], owners[1]];
                    declared.sort();
                    actual.sort();
                    if declared != actual {
                        return Err(Error::InvalidNfg(format!(
                            "edge `{id}` declared between {a} and {b} but used by {} and {}",
                            owners[0], owners[1]
                        )));
                    }
                }
                (Some(_), _) => {
                    return Err(Error::InvalidNfg(format!(
                        "edge `{id}` declared with the wrong kind"
                    )))
                }
            }
            let alphabet = self.alphabets.get(*id).copied().unwrap_or(2);
            if alphabet == 0 {
                return Err(Error::InvalidNfg(format!("edge `{id}` has an empty alphabet")));
            }
            edges.push(Edge { id: id.to_string(), alphabet, kind, ends: Vec::new() });
        }

        let mut sorted: Vec<&(String, Vec<String>, TableSpec)> = self.factors.iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        let mut factors = Vec::with_capacity(sorted.len());
        for (fi, (id, edge_ids, spec)) in sorted.into_iter().enumerate() {
            let idx: Vec<usize> = edge_ids.iter().map(|e| edge_lookup[e.as_str()]).collect();
            let radices: Vec<u32> = idx.iter().map(|&e| edges[e].alphabet).collect();
            for (slot, &e) in idx.iter().enumerate() {
                edges[e].ends.push(End { factor: fi, slot });
            }
            let table = match spec {
                TableSpec::Parity => {
                    if radices.iter().any(|&r| r != 2) {
                        return Err(Error::InvalidNfg(format!(
                            "parity factor `{id}` needs binary edges"
                        )));
                    }
                    LocalTable::parity(radices.len())
                }
                TableSpec::Repetition => LocalTable::repetition(radices)?,
                TableSpec::Rows(rows) => LocalTable::from_rows(radices, rows.clone())
                    .map_err(|e| Error::InvalidNfg(format!("factor `{id}`: {e}")))?,
                TableSpec::Table(t) => {
                    if t.radices() != radices.as_slice() {
                        return Err(Error::InvalidNfg(format!(
                            "factor `{id}`: table shape does not match edge alphabets"
                        )));
                    }
                    t.clone()
                }
            };
            factors.push(Factor { id: id.clone(), edges: idx, table });
        }
        for e in &mut edges {
            e.ends.sort();
        }
        Ok(Nfg { edges, factors, edge_lookup, factor_lookup })
    }
}

impl Nfg {
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn factor(&self, f: usize) -> &Factor {
        &self.factors[f]
    }

    pub fn edge_index(&self, id: &str) -> Result<usize> {
        self.edge_lookup.get(id).copied().ok_or_else(|| Error::UnknownEdge(id.to_string()))
    }

    pub fn factor_index(&self, id: &str) -> Result<usize> {
        self.factor_lookup.get(id).copied().ok_or_else(|| Error::UnknownFactor(id.to_string()))
    }

    pub fn half_edges(&self) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| !self.edges[e].is_full()).collect()
    }

    pub fn full_edges(&self) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].is_full()).collect()
    }

    /// Product of all edge alphabet sizes, `None` on overflow.
    pub fn configuration_space_size(&self) -> Option<u128> {
        self.edges
            .iter()
            .try_fold(1u128, |acc, e| acc.checked_mul(e.alphabet as u128))
    }

    /// Local assignment index of factor `f` under a configuration.
    pub fn local_index(&self, f: usize, config: &[Symbol]) -> LocalIndex {
        let factor = &self.factors[f];
        factor.edges.iter().fold(0u64, |acc, &e| {
            acc * self.edges[e].alphabet as u64 + config[e] as u64
        })
    }

    /// Builds a configuration from `(edge id, symbol)` pairs covering every edge.
    pub fn configuration(&self, pairs: &[(&str, Symbol)]) -> Result<Configuration> {
        let mut symbols = vec![None; self.edges.len()];
        for &(id, s) in pairs {
            let e = self.edge_index(id)?;
            symbols[e] = Some(s);
        }
        let symbols: Vec<Symbol> = symbols
            .into_iter()
            .enumerate()
            .map(|(e, s)| s.ok_or_else(|| Error::UnknownEdge(format!("{} (unassigned)", self.edges[e].id))))
            .collect::<Result<_>>()?;
        let config = Configuration(symbols);
        self.check_configuration(&config)?;
        Ok(config)
    }

    pub fn check_configuration(&self, config: &Configuration) -> Result<()> {
        if config.0.len() != self.edges.len() {
            return Err(Error::ShapeMismatch(format!(
                "configuration has {} symbols, graph has {} edges",
                config.0.len(),
                self.edges.len()
            )));
        }
        for (e, &s) in config.0.iter().enumerate() {
            if s >= self.edges[e].alphabet {
                return Err(Error::OutOfAlphabet { edge: self.edges[e].id.clone(), symbol: s });
            }
        }
        Ok(())
    }

    /// Number of connected components with factors as vertices and full edges as links.
    pub fn component_count(&self) -> usize {
        let mut dsu = crate::dsu::Dsu::new(self.factors.len());
        for e in &self.edges {
            if let [a, b] = e.ends[..] {
                dsu.union(a.factor, b.factor);
            }
        }
        dsu.count()
    }

    /// True when every factor is an indicator function.
    pub fn is_indicator(&self) -> bool {
        self.factors.iter().all(|f| f.table.is_indicator())
    }

    /// All factors are binary parity checks and there are no half-edges.
    pub fn is_cycle_code(&self) -> bool {
        self.edges.iter().all(Edge::is_full) && self.factors.iter().all(|f| f.table.is_parity())
    }

    /// Same structure with every table replaced.
    pub fn with_tables(&self, tables: Vec<LocalTable>) -> Result<Nfg> {
        if tables.len() != self.factors.len() {
            return Err(Error::ShapeMismatch("one table per factor expected".into()));
        }
        let mut out = self.clone();
        for (f, t) in out.factors.iter_mut().zip(tables) {
            if t.radices() != f.table.radices() {
                return Err(Error::ShapeMismatch(format!("table shape for `{}`", f.id)));
            }
            f.table = t;
        }
        Ok(out)
    }

    /// Builder pre-populated with this graph, for adding or altering parts.
    pub fn to_builder(&self) -> NfgBuilder {
        let mut b = NfgBuilder::new();
        for e in &self.edges {
            b.alphabet(&e.id, e.alphabet);
        }
        for f in &self.factors {
            let ids: Vec<&str> = f.edges.iter().map(|&e| self.edges[e].id.as_str()).collect();
            b.factor(&f.id, &ids, TableSpec::Table(f.table.clone()));
        }
        b
    }
}
