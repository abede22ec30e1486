//! Finite M-covers: one permutation of the M copies per full edge.

use std::collections::BTreeMap;
use std::fmt::Write;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::beta::ExactBeta;
use crate::caps::Caps;
use crate::dsu::Dsu;
use crate::error::{Error, Result};
use crate::nfg::{Configuration, LocalIndex, Nfg, NfgBuilder, TableSpec};
use crate::rational::factorials;

/// Cover degree plus one permutation of `0..M` per full edge, in sorted full-edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverSpec<'a> {
    base: &'a Nfg,
    m: u32,
    perms: Vec<Vec<u32>>,
}

impl<'a> CoverSpec<'a> {
    pub fn new(base: &'a Nfg, m: u32, perms: Vec<Vec<u32>>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidCover("cover degree must be positive".into()));
        }
        let full = base.full_edges();
        if perms.len() != full.len() {
            return Err(Error::InvalidCover(format!(
                "{} permutations given for {} full edges",
                perms.len(),
                full.len()
            )));
        }
        for (p, &e) in perms.iter().zip(&full) {
            let mut seen = vec![false; m as usize];
            let ok = p.len() == m as usize
                && p.iter().all(|&x| (x as usize) < seen.len() && !std::mem::replace(&mut seen[x as usize], true));
            if !ok {
                return Err(Error::InvalidCover(format!(
                    "edge `{}` does not carry a permutation of [{m}]",
                    base.edge(e).id
                )));
            }
        }
        Ok(CoverSpec { base, m, perms })
    }

    /// The cover made of `m` disjoint copies of the base graph.
    pub fn identity(base: &'a Nfg, m: u32) -> Self {
        let perms = vec![(0..m).collect(); base.full_edges().len()];
        CoverSpec { base, m, perms }
    }

    pub fn base(&self) -> &'a Nfg {
        self.base
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    /// Permutations in sorted full-edge order, zero-based images.
    pub fn permutations(&self) -> &[Vec<u32>] {
        &self.perms
    }

    /// Permutation attached to base edge `e`, `None` for half-edges.
    pub fn permutation(&self, e: usize) -> Option<&[u32]> {
        let full = self.base.full_edges();
        full.iter().position(|&x| x == e).map(|k| self.perms[k].as_slice())
    }

    /// `cover M=<m>` followed by `perm <edge> <images...>` with one-based images.
    pub fn emit(&self) -> String {
        let mut out = format!("cover M={}\n", self.m);
        for (p, e) in self.perms.iter().zip(self.base.full_edges()) {
            let images: Vec<String> = p.iter().map(|x| (x + 1).to_string()).collect();
            let _ = writeln!(out, "perm {} {}", self.base.edge(e).id, images.join(" "));
        }
        out
    }

    pub fn parse(base: &'a Nfg, text: &str) -> Result<Self> {
        let mut m = None;
        let mut perms: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            match tokens[0] {
                "cover" => {
                    let degree = tokens
                        .get(1)
                        .and_then(|t| t.strip_prefix("M="))
                        .and_then(|t| t.parse::<u32>().ok())
                        .filter(|_| tokens.len() == 2)
                        .ok_or_else(|| Error::parse(line, "expected `cover M=<m>`"))?;
                    m = Some(degree);
                }
                "perm" => {
                    let degree = m.ok_or_else(|| Error::parse(line, "`perm` before the `cover` header"))?;
                    let edge = tokens.get(1).ok_or_else(|| Error::parse(line, "missing edge"))?;
                    let e = base.edge_index(edge).map_err(|e| Error::parse(line, e.to_string()))?;
                    if !base.edge(e).is_full() {
                        return Err(Error::parse(line, format!("`{edge}` is a half-edge")));
                    }
                    let images: Vec<u32> = tokens[2..]
                        .iter()
                        .map(|t| t.parse::<u32>().ok().filter(|&x| x >= 1 && x <= degree).map(|x| x - 1))
                        .collect::<Option<_>>()
                        .ok_or_else(|| Error::parse(line, "images must be integers in 1..=M"))?;
                    if perms.insert(e, images).is_some() {
                        return Err(Error::parse(line, format!("duplicate permutation for `{edge}`")));
                    }
                }
                other => return Err(Error::parse(line, format!("unknown directive `{other}`"))),
            }
        }
        let m = m.ok_or_else(|| Error::parse(1, "missing `cover M=<m>` header"))?;
        let mut ordered = Vec::new();
        for e in base.full_edges() {
            let p = perms
                .remove(&e)
                .ok_or_else(|| Error::parse(1, format!("no permutation for `{}`", base.edge(e).id)))?;
            ordered.push(p);
        }
        CoverSpec::new(base, m, ordered).map_err(|e| Error::parse(1, e.to_string()))
    }
}

/// `(M!)^|E_full|`.
pub fn count_covers(nfg: &Nfg, m: u32) -> BigUint {
    let fact = factorials(m).pop().expect("m! exists");
    num_traits::pow(fact, nfg.full_edges().len())
}

fn count_covers_u64(nfg: &Nfg, m: u32, caps: &Caps) -> Result<u64> {
    let count = count_covers(nfg, m);
    let size = u128::try_from(&count).ok();
    caps.check_cover(size)?;
    Ok(size.expect("checked above") as u64)
}

/// Permutation of `0..m` with the given rank in lexicographic (Lehmer-code) order.
pub fn permutation_from_rank(m: u32, mut rank: u64) -> Vec<u32> {
    let mut pool: Vec<u32> = (0..m).collect();
    let mut radix: u64 = (1..m as u64).product();
    let mut out = Vec::with_capacity(m as usize);
    for k in (1..=m as u64).rev() {
        let digit = (rank / radix) as usize;
        rank %= radix;
        out.push(pool.remove(digit));
        if k > 1 {
            radix /= k - 1;
        }
    }
    out
}

/// Iterator over all M-covers in odometer order, the last full edge varying fastest.
#[derive(Debug, Clone)]
pub struct CoverIter<'a> {
    base: &'a Nfg,
    m: u32,
    next: u64,
    end: u64,
}

impl<'a> CoverIter<'a> {
    pub fn len_total(&self) -> u64 {
        self.end - self.next
    }

    /// Restricts the iterator to global indices `start..end`.
    pub fn range(mut self, start: u64, end: u64) -> Self {
        self.end = self.end.min(end);
        self.next = start.min(self.end);
        self
    }
}

impl<'a> Iterator for CoverIter<'a> {
    type Item = CoverSpec<'a>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.end {
            return None;
        }
        let spec = cover_at(self.base, self.m, self.next);
        self.next += 1;
        Some(spec)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.end - self.next) as usize;
        (n, Some(n))
    }
}

/// Every M-cover of `nfg`, each exactly once.
pub fn enumerate_covers<'a>(nfg: &'a Nfg, m: u32, caps: &Caps) -> Result<CoverIter<'a>> {
    if m == 0 {
        return Err(Error::InvalidCover("cover degree must be positive".into()));
    }
    let end = count_covers_u64(nfg, m, caps)?;
    Ok(CoverIter { base: nfg, m, next: 0, end })
}

/// The cover with the given odometer index.
pub fn cover_at(nfg: &Nfg, m: u32, mut index: u64) -> CoverSpec<'_> {
    let fact: u64 = (1..=m as u64).product();
    let k = nfg.full_edges().len();
    let mut perms = vec![Vec::new(); k];
    for slot in (0..k).rev() {
        perms[slot] = permutation_from_rank(m, index % fact);
        index /= fact;
    }
    CoverSpec { base: nfg, m, perms }
}

/// Independent uniform permutations per full edge from a seeded generator.
pub fn random_cover(nfg: &Nfg, m: u32, seed: u64) -> CoverSpec<'_> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_cover_with(nfg, m, &mut rng)
}

pub fn random_cover_with<'a>(nfg: &'a Nfg, m: u32, rng: &mut impl rand::Rng) -> CoverSpec<'a> {
    let perms = nfg
        .full_edges()
        .iter()
        .map(|_| {
            let mut p: Vec<u32> = (0..m).collect();
            p.shuffle(rng);
            p
        })
        .collect();
    CoverSpec { base: nfg, m, perms }
}

/// A constructed cover together with the copy maps back to the base graph.
#[derive(Debug, Clone)]
pub struct Cover {
    pub nfg: Nfg,
    /// `factor_copy[f][m]` is the cover factor `(f, m)`.
    pub factor_copy: Vec<Vec<usize>>,
    /// `edge_copy[e][m]` is the cover edge `(e, m)`.
    pub edge_copy: Vec<Vec<usize>>,
}

impl Cover {
    /// Base factor and copy index of a cover factor.
    pub fn factor_origin(&self, cover_factor: usize) -> (usize, usize) {
        origin(&self.factor_copy, cover_factor)
    }

    pub fn edge_origin(&self, cover_edge: usize) -> (usize, usize) {
        origin(&self.edge_copy, cover_edge)
    }

    /// Lifts a base configuration to every copy.
    pub fn lift(&self, config: &Configuration) -> Configuration {
        let mut out = vec![0; self.nfg.edges().len()];
        for (e, copies) in self.edge_copy.iter().enumerate() {
            for &c in copies {
                out[c] = config.0[e];
            }
        }
        Configuration(out)
    }
}

fn origin(copies: &[Vec<usize>], target: usize) -> (usize, usize) {
    for (x, row) in copies.iter().enumerate() {
        if let Some(m) = row.iter().position(|&c| c == target) {
            return (x, m);
        }
    }
    panic!("index {target} is not a cover element")
}

/// Cover factor `(f, m)` is named `f:m` and cover edge `(e, m)` is named `e:m`, with one-based `m`.
pub fn build_cover(spec: &CoverSpec<'_>) -> Result<Cover> {
    let base = spec.base;
    let m = spec.m as usize;
    let mut inverse: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (p, e) in spec.perms.iter().zip(base.full_edges()) {
        let mut inv = vec![0; m];
        for (i, &x) in p.iter().enumerate() {
            inv[x as usize] = i;
        }
        inverse.insert(e, inv);
    }
    let name = |id: &str, copy: usize| format!("{id}:{}", copy + 1);
    let mut builder = NfgBuilder::new();
    for e in base.edges() {
        for copy in 0..m {
            builder.alphabet(&name(&e.id, copy), e.alphabet);
        }
    }
    for (f, factor) in base.factors().iter().enumerate() {
        for copy in 0..m {
            let edges: Vec<String> = factor
                .edges
                .iter()
                .map(|&e| {
                    let edge = base.edge(e);
                    let k = if edge.is_full() && edge.ends[1].factor == f {
                        inverse[&e][copy]
                    } else {
                        copy
                    };
                    name(&edge.id, k)
                })
                .collect();
            let refs: Vec<&str> = edges.iter().map(String::as_str).collect();
            builder.factor(&name(&factor.id, copy), &refs, TableSpec::Table(factor.table.clone()));
        }
    }
    let nfg = builder.build()?;
    let factor_copy = base
        .factors()
        .iter()
        .map(|f| (0..m).map(|c| nfg.factor_index(&name(&f.id, c))).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let edge_copy = base
        .edges()
        .iter()
        .map(|e| (0..m).map(|c| nfg.edge_index(&name(&e.id, c))).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    Ok(Cover { nfg, factor_copy, edge_copy })
}

/// Integer counts behind `phi_M`: occurrences of each local assignment and edge symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LiftCounts {
    pub factors: Vec<BTreeMap<LocalIndex, u32>>,
    pub edges: Vec<Vec<u32>>,
}

impl LiftCounts {
    pub fn to_beta(&self, m: u32) -> ExactBeta {
        ExactBeta::from_counts(self.factors.clone(), self.edges.clone(), m)
    }
}

/// Counts for a cover configuration given as a raw assignment of cover edges.
pub(crate) fn lift_counts(base: &Nfg, cover: &Cover, assignment: &[u32]) -> LiftCounts {
    let factors = cover
        .factor_copy
        .iter()
        .map(|copies| {
            let mut counts = BTreeMap::new();
            for &cf in copies {
                *counts.entry(cover.nfg.local_index(cf, assignment)).or_insert(0) += 1;
            }
            counts
        })
        .collect();
    let edges = cover
        .edge_copy
        .iter()
        .enumerate()
        .map(|(e, copies)| {
            let mut counts = vec![0u32; base.edge(e).alphabet as usize];
            for &c in copies {
                counts[assignment[c] as usize] += 1;
            }
            counts
        })
        .collect();
    LiftCounts { factors, edges }
}

/// `phi_M`: frequencies of local assignments and edge symbols across the M copies.
pub fn phi_m(spec: &CoverSpec<'_>, cover: &Cover, config: &Configuration) -> Result<ExactBeta> {
    cover.nfg.check_configuration(config).map_err(|_| Error::InvalidConfiguration)?;
    let valid = (0..cover.nfg.factors().len()).all(|cf| {
        let i = cover.nfg.local_index(cf, &config.0);
        cover.nfg.factor(cf).table.position(i).is_some()
    });
    if !valid {
        return Err(Error::InvalidConfiguration);
    }
    Ok(lift_counts(spec.base, cover, &config.0).to_beta(spec.m))
}

/// Connected components of the cover, computed without building it.
pub fn cover_component_count(spec: &CoverSpec<'_>) -> usize {
    let m = spec.m as usize;
    let base = spec.base;
    let mut dsu = Dsu::new(base.factors().len() * m);
    for (p, e) in spec.perms.iter().zip(base.full_edges()) {
        let [a, b] = base.edge(e).ends[..] else { unreachable!("full edges have two ends") };
        for (copy, &image) in p.iter().enumerate() {
            dsu.union(a.factor * m + copy, b.factor * m + image as usize);
        }
    }
    dsu.count()
}
