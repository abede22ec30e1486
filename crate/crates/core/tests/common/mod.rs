#![allow(dead_code)]

use gcb_core::beta::ExactBeta;
use gcb_core::coding::{attach_channel, nfg_from_parity_check, Channel, DecodingNfg, ParityCheckMatrix};
use gcb_core::nfg::{LocalTable, Nfg, NfgBuilder, TableSpec};
use gcb_core::rational::parse_rational;
use gcb_core::Caps;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use std::collections::BTreeMap;

pub fn rat(text: &str) -> BigRational {
    parse_rational(text).expect("valid rational")
}

/// The 2-cover pseudo-marginal of the five-check graph with `e4 = 1` on both copies.
pub fn cont3_beta(nfg: &Nfg) -> ExactBeta {
    gcb_core::fixtures::five_checks_beta(nfg)
}

/// Random positive table with entries `k / 4` for `k` in `lo..=hi`.
pub fn random_table(radices: Vec<u32>, rng: &mut impl Rng, lo: i64, hi: i64) -> LocalTable {
    let size: u32 = radices.iter().product();
    let values: Vec<BigRational> =
        (0..size).map(|_| BigRational::new(BigInt::from(rng.random_range(lo..=hi)), BigInt::from(4))).collect();
    let radices_ref = radices.clone();
    LocalTable::from_fn(radices, move |a| {
        let index = a.iter().zip(&radices_ref).fold(0usize, |acc, (&s, &r)| acc * r as usize + s as usize);
        values[index].clone()
    })
    .expect("small table")
}

/// A tree of 2..=5 factors with random alphabets, half-edges and positive tables.
pub fn random_tree_nfg(rng: &mut impl Rng) -> Nfg {
    let k = rng.random_range(2..=5);
    let mut incident: Vec<Vec<String>> = vec![Vec::new(); k];
    let mut alphabets: BTreeMap<String, u32> = BTreeMap::new();
    let mut new_edge = |rng: &mut dyn rand::RngCore| {
        let id = format!("t{:02}", alphabets.len());
        alphabets.insert(id.clone(), rng.random_range(2..=3));
        id
    };
    for i in 1..k {
        let j = rng.random_range(0..i);
        let id = new_edge(rng);
        incident[i].push(id.clone());
        incident[j].push(id);
    }
    for f in incident.iter_mut() {
        if rng.random_bool(0.5) {
            f.push(new_edge(rng));
        }
    }
    finish(incident, &alphabets, rng)
}

/// Attaches random positive tables to the given incidence lists.
pub fn finish(incident: Vec<Vec<String>>, alphabets: &BTreeMap<String, u32>, rng: &mut impl Rng) -> Nfg {
    let mut b = NfgBuilder::new();
    for (id, &q) in alphabets {
        b.alphabet(id, q);
    }
    for (i, f) in incident.iter().enumerate() {
        let radices: Vec<u32> = f.iter().map(|e| alphabets[e]).collect();
        let refs: Vec<&str> = f.iter().map(String::as_str).collect();
        b.factor(&format!("g{i}"), &refs, TableSpec::Table(random_table(radices, rng, 2, 8)));
    }
    b.build().expect("well formed")
}

/// A cycle of 3..=4 factors plus a chord or pendant half-edges, with positive tables.
pub fn random_loopy_nfg(rng: &mut impl Rng) -> Nfg {
    let k = rng.random_range(3..=4);
    let mut incident: Vec<Vec<String>> = vec![Vec::new(); k];
    let mut alphabets: BTreeMap<String, u32> = BTreeMap::new();
    for i in 0..k {
        let id = format!("c{i}");
        alphabets.insert(id.clone(), rng.random_range(2..=3));
        incident[i].push(id.clone());
        incident[(i + 1) % k].push(id);
    }
    if rng.random_bool(0.5) {
        alphabets.insert("chord".into(), 2);
        incident[0].push("chord".into());
        incident[2].push("chord".into());
    }
    for (i, f) in incident.iter_mut().enumerate() {
        if rng.random_bool(0.5) {
            let id = format!("h{i}");
            alphabets.insert(id.clone(), 2);
            f.push(id);
        }
    }
    finish(incident, &alphabets, rng)
}

/// Parity-check matrix of a code whose Tanner graph is a tree with checks of degree at least two.
pub fn random_tree_code(rng: &mut impl Rng, n: usize) -> ParityCheckMatrix {
    let mut checks: Vec<Vec<usize>> = Vec::new();
    let mut symbols = 1;
    while symbols < n {
        let anchor = rng.random_range(0..symbols);
        let fresh = rng.random_range(1..=2).min(n - symbols);
        let mut check = vec![anchor];
        check.extend(symbols..symbols + fresh);
        symbols += fresh;
        checks.push(check);
    }
    let rows = checks
        .iter()
        .map(|c| (0..n).map(|i| u8::from(c.contains(&i))).collect())
        .collect();
    ParityCheckMatrix::new(rows).expect("tree code")
}

/// Random binary-input channel with `outputs` symbols and strictly positive likelihoods.
pub fn random_channel(rng: &mut impl Rng, outputs: usize) -> Channel {
    let rows: Vec<Vec<BigRational>> = (0..2)
        .map(|_| {
            let raw: Vec<i64> = (0..outputs).map(|_| rng.random_range(1..=20)).collect();
            let total: i64 = raw.iter().sum();
            raw.iter().map(|&v| BigRational::new(v.into(), total.into())).collect()
        })
        .collect();
    Channel::new(rows).expect("normalized")
}

pub fn decoding_graph(h: &ParityCheckMatrix, channel: &Channel, y: &[u32]) -> DecodingNfg {
    attach_channel(&nfg_from_parity_check(h), channel, y, &Caps::default()).expect("decoding graph")
}
