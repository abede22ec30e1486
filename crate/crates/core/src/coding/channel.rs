use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::nfg::{LocalTable, Nfg, Symbol, TableSpec};
use crate::rational::{format_rational, from_f64, parse_rational, to_f64};

use super::matrix::{determined_by, half_edge_fibers};

/// A discrete memoryless channel `W(y|x)` with an optional per-symbol input prior.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    /// `w[x][y]`.
    w: Vec<Vec<BigRational>>,
    prior: Option<Vec<BigRational>>,
}

impl Channel {
    pub fn new(w: Vec<Vec<BigRational>>) -> Result<Self> {
        let outputs = w.first().map_or(0, Vec::len);
        if w.is_empty() || outputs == 0 || w.iter().any(|row| row.len() != outputs) {
            return Err(Error::InvalidChannel("likelihood table must be a non-empty rectangle".into()));
        }
        for (x, row) in w.iter().enumerate() {
            if row.iter().any(|v| *v < BigRational::zero()) {
                return Err(Error::InvalidChannel(format!("negative likelihood for input {x}")));
            }
            let sum: f64 = row.iter().map(to_f64).sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidChannel(format!("row for input {x} sums to {sum}")));
            }
        }
        Ok(Channel { w, prior: None })
    }

    pub fn from_f64(w: &[Vec<f64>]) -> Result<Self> {
        Self::new(w.iter().map(|row| row.iter().map(|&v| from_f64(v)).collect()).collect())
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: BigRational) -> Result<Self> {
        let q = BigRational::one() - &p;
        Self::new(vec![vec![q.clone(), p.clone()], vec![p, q]])
    }

    /// Binary erasure channel with outputs `0, 1` and erasure symbol `2`.
    pub fn bec(eps: BigRational) -> Result<Self> {
        let q = BigRational::one() - &eps;
        let z = BigRational::zero();
        Self::new(vec![vec![q.clone(), z.clone(), eps.clone()], vec![z, q, eps]])
    }

    /// Product prior over each symbol, absorbed into the channel factors.
    pub fn with_prior(mut self, prior: Vec<BigRational>) -> Result<Self> {
        if prior.len() != self.inputs() || prior.iter().any(|p| *p < BigRational::zero()) {
            return Err(Error::InvalidChannel("prior needs one non-negative entry per input".into()));
        }
        let sum: f64 = prior.iter().map(to_f64).sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidChannel(format!("prior sums to {sum}")));
        }
        self.prior = Some(prior);
        Ok(self)
    }

    /// Lines `W <y> <x> <prob>` and optionally `prior <x> <prob>`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut prior = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let tokens: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
            let int = |t: &str| t.parse::<usize>().map_err(|_| Error::parse(line, format!("bad symbol `{t}`")));
            let prob = |t: &str| parse_rational(t).ok_or_else(|| Error::parse(line, format!("bad probability `{t}`")));
            match tokens.as_slice() {
                [] => {}
                ["W", y, x, p] => entries.push((int(x)?, int(y)?, prob(p)?)),
                ["prior", x, p] => prior.push((int(x)?, prob(p)?)),
                _ => return Err(Error::parse(line, "expected `W <y> <x> <prob>` or `prior <x> <prob>`")),
            }
        }
        if entries.is_empty() {
            return Err(Error::parse(1, "channel file has no `W` lines"));
        }
        let inputs = entries.iter().map(|e| e.0).max().unwrap_or(0) + 1;
        let outputs = entries.iter().map(|e| e.1).max().unwrap_or(0) + 1;
        let mut w = vec![vec![BigRational::zero(); outputs]; inputs];
        for (x, y, p) in entries {
            w[x][y] = p;
        }
        let channel = Self::new(w).map_err(|e| Error::parse(1, e.to_string()))?;
        if prior.is_empty() {
            return Ok(channel);
        }
        let mut p = vec![BigRational::zero(); inputs];
        for (x, v) in prior {
            *p.get_mut(x).ok_or_else(|| Error::parse(1, format!("prior for unknown input {x}")))? = v;
        }
        channel.with_prior(p).map_err(|e| Error::parse(1, e.to_string()))
    }

    pub fn emit(&self) -> String {
        let mut out = String::new();
        for (x, row) in self.w.iter().enumerate() {
            for (y, p) in row.iter().enumerate() {
                out += &format!("W {y} {x} {}\n", format_rational(p));
            }
        }
        if let Some(prior) = &self.prior {
            for (x, p) in prior.iter().enumerate() {
                out += &format!("prior {x} {}\n", format_rational(p));
            }
        }
        out
    }

    pub fn inputs(&self) -> usize {
        self.w.len()
    }

    pub fn outputs(&self) -> usize {
        self.w[0].len()
    }

    /// `P_X(x) W(y|x)`, or `W(y|x)` without a prior.
    pub fn weight(&self, y: Symbol, x: Symbol) -> BigRational {
        let w = self.w[x as usize][y as usize].clone();
        match &self.prior {
            Some(p) => w * &p[x as usize],
            None => w,
        }
    }

    pub fn likelihood(&self, y: Symbol, x: Symbol) -> f64 {
        to_f64(&self.w[x as usize][y as usize])
    }

    pub fn has_prior(&self) -> bool {
        self.prior.is_some()
    }

    fn check_outputs(&self, y: &[Symbol]) -> Result<()> {
        match y.iter().find(|&&s| s as usize >= self.outputs()) {
            Some(s) => Err(Error::InvalidChannel(format!("received symbol {s} is not a channel output"))),
            None => Ok(()),
        }
    }
}

/// A graph whose global function is proportional to `P(x, y)` for a fixed received vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodingNfg {
    pub nfg: Nfg,
    /// Edges carrying the code symbols, in code order.
    pub symbol_edges: Vec<usize>,
    /// `g(c(x)) = gamma * P(x, y)` when the code size is known.
    pub gamma: Option<f64>,
}

impl DecodingNfg {
    /// Ids of the symbol edges, in code order.
    pub fn symbol_ids(&self) -> Vec<String> {
        self.symbol_edges.iter().map(|&e| self.nfg.edge(e).id.clone()).collect()
    }
}

/// Fiber size must be one so that decoders act on codewords.
fn check_single_fiber(nfg: &Nfg, symbols: &[usize], caps: &Caps) -> Result<Option<u64>> {
    if determined_by(nfg, symbols) {
        return Ok(None);
    }
    let fibers = half_edge_fibers(nfg, symbols, caps)?;
    if let Some((word, &t)) = fibers.iter().find(|(_, &t)| t != 1) {
        return Err(Error::NotSingleFiber(format!("{t} configurations map to {word:?}")));
    }
    Ok(Some(fibers.len() as u64))
}

fn gamma(channel: &Channel, code_size: Option<u64>) -> Option<f64> {
    if channel.has_prior() {
        Some(1.0)
    } else {
        code_size.map(|c| c as f64)
    }
}

/// Turns every half-edge of a code graph into a full edge ending in a degree-one channel factor
/// `w:<edge>` with table `x -> P_X(x) W(y_i|x)`.
pub fn attach_channel(code: &Nfg, channel: &Channel, y: &[Symbol], caps: &Caps) -> Result<DecodingNfg> {
    let half = code.half_edges();
    if y.len() != half.len() {
        return Err(Error::LengthMismatch { expected: half.len(), found: y.len() });
    }
    channel.check_outputs(y)?;
    if let Some(f) = code.factors().iter().find(|f| !f.table.is_indicator()) {
        return Err(Error::InvalidNfg(format!("factor `{}` is not an indicator, so the graph is not a code", f.id)));
    }
    if let Some(&e) = half.iter().find(|&&e| code.edge(e).alphabet as usize != channel.inputs()) {
        return Err(Error::InvalidChannel(format!("edge `{}` alphabet differs from the channel input", code.edge(e).id)));
    }
    let code_size = check_single_fiber(code, &half, caps)?;
    let mut builder = code.to_builder();
    for (&e, &ys) in half.iter().zip(y) {
        let id = &code.edge(e).id;
        let rows = (0..channel.inputs() as Symbol).map(|x| (vec![x], channel.weight(ys, x))).collect();
        builder.factor(&format!("w:{id}"), &[id], TableSpec::Rows(rows));
    }
    let nfg = builder.build()?;
    let symbol_edges = half.iter().map(|&e| nfg.edge_index(&code.edge(e).id)).collect::<Result<_>>()?;
    Ok(DecodingNfg { nfg, symbol_edges, gamma: gamma(channel, code_size) })
}

/// Multiplies `P_X(x) W(y|x)` for each listed symbol edge into the table of its first endpoint
/// (the lexicographically smaller factor id). Used for codes whose symbols sit on full edges.
pub fn absorb_channel(code: &Nfg, symbols: &[&str], channel: &Channel, y: &[Symbol], caps: &Caps) -> Result<DecodingNfg> {
    if y.len() != symbols.len() {
        return Err(Error::LengthMismatch { expected: symbols.len(), found: y.len() });
    }
    channel.check_outputs(y)?;
    let symbol_edges: Vec<usize> = symbols.iter().map(|s| code.edge_index(s)).collect::<Result<_>>()?;
    if let Some(&e) = symbol_edges.iter().find(|&&e| code.edge(e).alphabet as usize != channel.inputs()) {
        return Err(Error::InvalidChannel(format!("edge `{}` alphabet differs from the channel input", code.edge(e).id)));
    }
    let code_size = check_single_fiber(code, &symbol_edges, caps)?;
    let mut tables = Vec::with_capacity(code.factors().len());
    for (f, factor) in code.factors().iter().enumerate() {
        let attached: Vec<(usize, Symbol)> = symbol_edges
            .iter()
            .zip(y)
            .filter(|(&e, _)| code.edge(e).ends[0].factor == f)
            .map(|(&e, &ys)| (factor.edges.iter().position(|&x| x == e).expect("incident"), ys))
            .collect();
        if attached.is_empty() {
            tables.push(factor.table.clone());
            continue;
        }
        let table = &factor.table;
        tables.push(LocalTable::from_fn(table.radices().to_vec(), |a| {
            let base = table.exact_value(table.encode(a));
            attached.iter().fold(base, |acc, &(slot, ys)| acc * channel.weight(ys, a[slot]))
        })?);
    }
    Ok(DecodingNfg { nfg: code.with_tables(tables)?, symbol_edges, gamma: gamma(channel, code_size) })
}
