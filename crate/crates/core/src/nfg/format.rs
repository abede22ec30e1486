//! Line-oriented NFG text format.
//!
//! ```text
//! alphabet e3 3
//! halfedge e1
//! fulledge e2 f1 f2
//! factor f1 e1 e2
//! row 0 0 1/2
//! row 1 1 0.25
//! factor f2 e2 e3
//! repetition
//! ```
//!
//! `parity` and `repetition` expand to 0/1 indicator tables. Unlisted rows are zero.
//! Alphabets default to binary. `#` starts a comment.

use std::fmt::Write;

use super::{parse_symbols, Nfg, NfgBuilder, Symbol, TableSpec};
use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational};

enum Pending {
    None,
    Rows { id: String, edges: Vec<String>, rows: Vec<(Vec<Symbol>, num_rational::BigRational)> },
}

pub fn parse_nfg(text: &str) -> Result<Nfg> {
    let mut builder = NfgBuilder::new();
    let mut pending = Pending::None;
    let mut degree = 0usize;
    let mut factor_lines: Vec<(String, usize)> = Vec::new();
    let mut saw_anything = false;

    let flush = |builder: &mut NfgBuilder, pending: &mut Pending| {
        if let Pending::Rows { id, edges, rows, .. } = std::mem::replace(pending, Pending::None) {
            let refs: Vec<&str> = edges.iter().map(String::as_str).collect();
            builder.factor(&id, &refs, TableSpec::Rows(rows));
        }
    };

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        saw_anything = true;
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens[0] {
            "alphabet" => {
                let [_, edge, size] = tokens[..] else {
                    return Err(Error::parse(line, "expected `alphabet <edge> <size>`"));
                };
                let size: u32 = size
                    .parse()
                    .ok()
                    .filter(|&s| s > 0)
                    .ok_or_else(|| Error::parse(line, format!("bad alphabet size `{size}`")))?;
                builder.alphabet(edge, size);
            }
            "halfedge" => {
                let [_, edge] = tokens[..] else {
                    return Err(Error::parse(line, "expected `halfedge <edge>`"));
                };
                builder.half_edge(edge);
            }
            "fulledge" => {
                let [_, edge, a, b] = tokens[..] else {
                    return Err(Error::parse(line, "expected `fulledge <edge> <factorA> <factorB>`"));
                };
                builder.full_edge(edge, a, b);
            }
            "factor" => {
                flush(&mut builder, &mut pending);
                if tokens.len() < 3 {
                    return Err(Error::parse(line, "expected `factor <id> <edges...>`"));
                }
                let id = tokens[1].to_string();
                factor_lines.push((id.clone(), line));
                let edges: Vec<String> = tokens[2..].iter().map(|s| s.to_string()).collect();
                degree = edges.len();
                pending = Pending::Rows { id, edges, rows: Vec::new() };
            }
            "parity" | "repetition" => {
                let Pending::Rows { id, edges, rows, .. } = std::mem::replace(&mut pending, Pending::None) else {
                    return Err(Error::parse(line, format!("`{}` outside a factor block", tokens[0])));
                };
                if !rows.is_empty() || tokens.len() != 1 {
                    return Err(Error::parse(line, "shorthand cannot be mixed with rows"));
                }
                let refs: Vec<&str> = edges.iter().map(String::as_str).collect();
                let spec = if tokens[0] == "parity" { TableSpec::Parity } else { TableSpec::Repetition };
                builder.factor(&id, &refs, spec);
            }
            "row" => {
                let Pending::Rows { rows, .. } = &mut pending else {
                    return Err(Error::parse(line, "`row` outside a factor block"));
                };
                let (value, assignment) = tokens[1..]
                    .split_last()
                    .ok_or_else(|| Error::parse(line, "expected `row <assignment...> <value>`"))?;
                let symbols: Vec<Symbol> = if assignment.len() == 1 && degree > 1 {
                    parse_symbols(assignment[0], degree)
                        .ok_or_else(|| Error::parse(line, format!("bad assignment `{}`", assignment[0])))?
                } else {
                    assignment
                        .iter()
                        .map(|s| s.parse().map_err(|_| Error::parse(line, format!("bad symbol `{s}`"))))
                        .collect::<Result<_>>()?
                };
                if symbols.len() != degree {
                    return Err(Error::parse(
                        line,
                        format!("row has {} symbols, factor has {degree} edges", symbols.len()),
                    ));
                }
                let value = parse_rational(value)
                    .filter(|v| !num_traits::Signed::is_negative(v))
                    .ok_or_else(|| Error::parse(line, format!("bad value `{value}`")))?;
                rows.push((symbols, value));
            }
            other => return Err(Error::parse(line, format!("unknown directive `{other}`"))),
        }
    }
    flush(&mut builder, &mut pending);
    if !saw_anything {
        return Err(Error::parse(1, "empty input"));
    }
    builder.build().map_err(|e| {
        let message = e.to_string();
        let line = factor_lines
            .iter()
            .find(|(id, _)| message.contains(&format!("`{id}`")))
            .map_or(text.lines().count().max(1), |(_, l)| *l);
        Error::parse(line, message)
    })
}

/// Renders a graph so that [`parse_nfg`] reproduces it.
pub fn emit_nfg(nfg: &Nfg) -> String {
    let mut out = String::new();
    for e in nfg.edges() {
        if e.alphabet != 2 {
            let _ = writeln!(out, "alphabet {} {}", e.id, e.alphabet);
        }
    }
    for e in nfg.edges() {
        match e.ends[..] {
            [_] => {
                let _ = writeln!(out, "halfedge {}", e.id);
            }
            [a, b] => {
                let _ = writeln!(
                    out,
                    "fulledge {} {} {}",
                    e.id,
                    nfg.factor(a.factor).id,
                    nfg.factor(b.factor).id
                );
            }
            _ => unreachable!("edges have one or two ends"),
        }
    }
    for f in nfg.factors() {
        let ids: Vec<&str> = f.edges.iter().map(|&e| nfg.edge(e).id.as_str()).collect();
        let _ = writeln!(out, "factor {} {}", f.id, ids.join(" "));
        if f.table.is_parity() && f.table.degree() > 0 {
            out.push_str("parity\n");
        } else if f.table.is_repetition() && f.table.degree() > 1 {
            out.push_str("repetition\n");
        } else {
            for (i, value) in f.table.support().iter().zip(f.table.exact_values()) {
                let symbols: Vec<String> = f.table.decode(*i).iter().map(|s| s.to_string()).collect();
                let _ = writeln!(out, "row {} {}", symbols.join(" "), format_rational(value));
            }
        }
    }
    out
}
