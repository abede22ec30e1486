use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::nfg::{for_each_valid, Nfg, NfgBuilder, Symbol, TableSpec};

/// A binary parity-check matrix with no all-zero column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    rows: Vec<Vec<u8>>,
    cols: usize,
}

impl ParityCheckMatrix {
    pub fn new(rows: Vec<Vec<u8>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 {
            return Err(Error::InvalidArgument("parity-check matrix is empty".into()));
        }
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("parity-check rows differ in length".into()));
        }
        if rows.iter().flatten().any(|&v| v > 1) {
            return Err(Error::InvalidArgument("parity-check entries must be 0 or 1".into()));
        }
        if let Some(j) = rows.iter().position(|r| r.iter().all(|&v| v == 0)) {
            return Err(Error::InvalidArgument(format!("row {} is all zero", j + 1)));
        }
        if let Some(i) = (0..cols).find(|&i| rows.iter().all(|r| r[i] == 0)) {
            return Err(Error::InvalidArgument(format!("column {} is all zero", i + 1)));
        }
        Ok(ParityCheckMatrix { rows, cols })
    }

    /// Reads the alist format when the first line holds two counts, dense 0/1 rows otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = content_lines(text).collect();
        let Some(&(_, first)) = lines.first() else {
            return Err(Error::parse(1, "empty parity-check matrix"));
        };
        let head: Vec<&str> = first.split_whitespace().collect();
        let looks_alist = head.len() == 2 && head.iter().any(|t| t.parse::<u32>().is_ok_and(|v| v > 1));
        if looks_alist {
            Self::parse_alist(text)
        } else {
            Self::parse_dense(text)
        }
    }

    /// One row per line, entries separated by spaces or written as a run of digits.
    pub fn parse_dense(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (line, content) in content_lines(text) {
            let tokens: Vec<&str> = content.split_whitespace().collect();
            let digits: Vec<&str> = if tokens.len() == 1 {
                content.trim().split("").filter(|s| !s.is_empty()).collect()
            } else {
                tokens
            };
            let row = digits
                .iter()
                .map(|t| match *t {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    other => Err(Error::parse(line, format!("bad entry `{other}`"))),
                })
                .collect::<Result<Vec<u8>>>()?;
            rows.push(row);
        }
        Self::new(rows).map_err(|e| Error::parse(1, e.to_string()))
    }

    /// MacKay's alist format: sizes, maximum degrees, degree lists, then column and row
    /// neighbor lists with 1-based indices (zero entries are padding).
    pub fn parse_alist(text: &str) -> Result<Self> {
        let mut tokens = content_lines(text).flat_map(|(line, l)| l.split_whitespace().map(move |t| (line, t)));
        let mut next = |what: &str| -> Result<usize> {
            let (line, t) = tokens.next().ok_or_else(|| Error::parse(0, format!("missing {what}")))?;
            t.parse().map_err(|_| Error::parse(line, format!("bad {what} `{t}`")))
        };
        let (n, m) = (next("column count")?, next("row count")?);
        let (max_col, max_row) = (next("max column degree")?, next("max row degree")?);
        let col_deg = (0..n).map(|_| next("column degree")).collect::<Result<Vec<_>>>()?;
        let row_deg = (0..m).map(|_| next("row degree")).collect::<Result<Vec<_>>>()?;
        let mut rows = vec![vec![0u8; n]; m];
        for (i, &d) in col_deg.iter().enumerate() {
            for k in 0..max_col {
                let j = next("row index")?;
                if k < d {
                    if j == 0 || j > m {
                        return Err(Error::parse(0, format!("row index {j} out of range")));
                    }
                    rows[j - 1][i] = 1;
                }
            }
        }
        let mut check = vec![vec![0u8; n]; m];
        for (j, &d) in row_deg.iter().enumerate() {
            for k in 0..max_row {
                let i = next("column index")?;
                if k < d {
                    if i == 0 || i > n {
                        return Err(Error::parse(0, format!("column index {i} out of range")));
                    }
                    check[j][i - 1] = 1;
                }
            }
        }
        if check != rows {
            return Err(Error::parse(0, "column and row lists disagree"));
        }
        Self::new(rows).map_err(|e| Error::parse(0, e.to_string()))
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    pub fn num_checks(&self) -> usize {
        self.rows.len()
    }

    pub fn num_symbols(&self) -> usize {
        self.cols
    }

    /// `(d_L, d_R)` when every column has weight `d_L` and every row weight `d_R`.
    pub fn regularity(&self) -> Option<(usize, usize)> {
        let col: BTreeSet<usize> = (0..self.cols).map(|i| self.rows.iter().filter(|r| r[i] == 1).count()).collect();
        let row: BTreeSet<usize> = self.rows.iter().map(|r| r.iter().filter(|&&v| v == 1).count()).collect();
        match (col.len(), row.len()) {
            (1, 1) => Some((*col.first()?, *row.first()?)),
            _ => None,
        }
    }

    /// Rank over GF(2).
    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        let mut rank = 0;
        for c in 0..self.cols {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r][c] == 1) else { continue };
            rows.swap(rank, p);
            for r in 0..rows.len() {
                if r != rank && rows[r][c] == 1 {
                    let pivot = rows[rank].clone();
                    rows[r].iter_mut().zip(&pivot).for_each(|(a, b)| *a ^= b);
                }
            }
            rank += 1;
        }
        rank
    }

    /// All codewords by exhaustive search, in lexicographic order.
    pub fn codewords(&self) -> Result<Vec<Vec<Symbol>>> {
        if self.cols > 26 {
            return Err(Error::CapExceeded { what: "codeword search", size: format!("2^{}", self.cols), cap: 1 << 26 });
        }
        Ok((0..1u64 << self.cols)
            .map(|bits| (0..self.cols).map(|i| ((bits >> (self.cols - 1 - i)) & 1) as Symbol).collect::<Vec<_>>())
            .filter(|x| self.rows.iter().all(|r| r.iter().zip(x).map(|(&h, &b)| h as u32 * b).sum::<u32>() % 2 == 0))
            .collect())
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn padded(prefix: &str, index: usize, count: usize) -> String {
    format!("{prefix}{:0width$}", index + 1, width = count.to_string().len())
}

/// Symbol half-edge ids `x01..`, in column order.
pub fn symbol_edge_ids(h: &ParityCheckMatrix) -> Vec<String> {
    (0..h.cols).map(|i| padded("x", i, h.cols)).collect()
}

/// Repetition factor `v<i>` per column carrying half-edge `x<i>`, parity factor `c<j>` per row,
/// and a full edge `e<j>_<i>` for each nonzero entry.
pub fn nfg_from_parity_check(h: &ParityCheckMatrix) -> Nfg {
    let (m, n) = (h.rows.len(), h.cols);
    let edge = |j: usize, i: usize| format!("{}_{}", padded("e", j, m), padded("", i, n));
    let mut b = NfgBuilder::new();
    for (j, row) in h.rows.iter().enumerate() {
        let edges: Vec<String> = (0..n).filter(|&i| row[i] == 1).map(|i| edge(j, i)).collect();
        let refs: Vec<&str> = edges.iter().map(String::as_str).collect();
        b.factor(&padded("c", j, m), &refs, TableSpec::Parity);
    }
    for (i, x) in symbol_edge_ids(h).iter().enumerate() {
        let mut edges = vec![x.clone()];
        edges.extend((0..m).filter(|&j| h.rows[j][i] == 1).map(|j| edge(j, i)));
        let refs: Vec<&str> = edges.iter().map(String::as_str).collect();
        b.half_edge(x).factor(&padded("v", i, n), &refs, TableSpec::Repetition);
    }
    b.build().expect("parity-check graphs are well formed")
}

/// Outcome of checking that a graph represents a code on its half-edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeRepresentation {
    pub represents: bool,
    /// Number of valid configurations per codeword, when constant.
    pub t_n: Option<u64>,
    pub reason: Option<String>,
}

impl CodeRepresentation {
    fn fail(reason: impl Into<String>) -> Self {
        CodeRepresentation { represents: false, t_n: None, reason: Some(reason.into()) }
    }
}

/// Checks indicator factors, half-edge alphabets, projection equality and a constant fiber size.
pub fn check_represents_code(nfg: &Nfg, code: &BTreeSet<Vec<Symbol>>, caps: &Caps) -> Result<CodeRepresentation> {
    if let Some(f) = nfg.factors().iter().find(|f| !f.table.is_indicator()) {
        return Ok(CodeRepresentation::fail(format!("factor `{}` is not an indicator", f.id)));
    }
    let half = nfg.half_edges();
    for word in code {
        if word.len() != half.len() {
            return Ok(CodeRepresentation::fail("codeword length differs from the number of half-edges"));
        }
        if let Some((&e, _)) = half.iter().zip(word).find(|(&e, &s)| s >= nfg.edge(e).alphabet) {
            return Ok(CodeRepresentation::fail(format!("codeword symbol outside the alphabet of `{}`", nfg.edge(e).id)));
        }
    }
    let fibers = half_edge_fibers(nfg, &half, caps)?;
    let projection: BTreeSet<Vec<Symbol>> = fibers.keys().cloned().collect();
    if &projection != code {
        return Ok(CodeRepresentation::fail("half-edge projection differs from the code"));
    }
    let sizes: BTreeSet<u64> = fibers.values().copied().collect();
    match sizes.len() {
        0 => Ok(CodeRepresentation { represents: true, t_n: None, reason: None }),
        1 => Ok(CodeRepresentation { represents: true, t_n: sizes.first().copied(), reason: None }),
        _ => Ok(CodeRepresentation::fail("fiber sizes differ between codewords")),
    }
}

/// Number of valid configurations per assignment of the edges `edges`.
pub(crate) fn half_edge_fibers(nfg: &Nfg, edges: &[usize], caps: &Caps) -> Result<BTreeMap<Vec<Symbol>, u64>> {
    let mut fibers: BTreeMap<Vec<Symbol>, u64> = BTreeMap::new();
    for_each_valid(nfg, caps, &[], |a, _| {
        *fibers.entry(edges.iter().map(|&e| a[e]).collect()).or_default() += 1;
        ControlFlow::Continue(())
    })?;
    Ok(fibers)
}

/// True when repetition and parity propagation from `known` edges fixes every edge, so each
/// assignment of `known` extends to at most one valid configuration.
pub(crate) fn determined_by(nfg: &Nfg, known: &[usize]) -> bool {
    let mut fixed = vec![false; nfg.edges().len()];
    known.iter().for_each(|&e| fixed[e] = true);
    loop {
        let mut changed = false;
        for f in nfg.factors() {
            let open: Vec<usize> = f.edges.iter().copied().filter(|&e| !fixed[e]).collect();
            let propagates = (f.table.is_repetition() && open.len() < f.edges.len())
                || (f.table.is_parity() && open.len() == 1)
                || f.table.support_len() == 1;
            if propagates && !open.is_empty() {
                open.iter().for_each(|&e| fixed[e] = true);
                changed = true;
            }
        }
        if !changed {
            return fixed.iter().all(|&x| x);
        }
    }
}
