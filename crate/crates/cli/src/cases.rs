use std::collections::BTreeMap;

use gcb_core::beta::emit_beta;
use gcb_core::bethe::{bethe_terms_exact, zbethe_m_enumeration, zbethe_m_typesum};
use gcb_core::coding::{check_represents_code, cycle_code_zgibbs, half_edge_code};
use gcb_core::counting::preimage_count_closedform;
use gcb_core::covers::{build_cover, enumerate_covers, phi_m};
use gcb_core::fixtures::{dumbbell, five_checks, five_checks_beta};
use gcb_core::gibbs::gibbs_partition_exact;
use gcb_core::nfg::{enumerate_configurations, format_symbols};
use gcb_core::rational::format_rational;
use gcb_core::{Caps, Error};
use num_rational::BigRational;

use crate::error::{CliError, CliResult};
use crate::report::Report;

pub struct Case {
    pub name: &'static str,
    pub run: fn(&Caps) -> CliResult<Report>,
    pub golden: &'static str,
}

pub const CASES: [Case; 4] = [
    Case { name: "five-checks-enumeration", run: five_checks_enumeration, golden: include_str!("../goldens/five-checks-enumeration.txt") },
    Case { name: "five-checks-cover", run: five_checks_cover, golden: include_str!("../goldens/five-checks-cover.txt") },
    Case { name: "dumbbell-zgibbs", run: dumbbell_zgibbs, golden: include_str!("../goldens/dumbbell-zgibbs.txt") },
    Case { name: "dumbbell-zbethe2", run: dumbbell_zbethe2, golden: include_str!("../goldens/dumbbell-zbethe2.txt") },
];

pub fn find(name: &str) -> CliResult<&'static Case> {
    CASES.iter().find(|c| c.name == name).ok_or_else(|| {
        let names: Vec<&str> = CASES.iter().map(|c| c.name).collect();
        CliError::Usage(format!("unknown case `{name}`; expected one of {}", names.join(", ")))
    })
}

fn five_checks_enumeration(caps: &Caps) -> CliResult<Report> {
    let nfg = five_checks();
    let mut r = Report::new();
    r.kv("edges", nfg.edges().iter().map(|e| e.id.as_str()).collect::<Vec<_>>().join(","));
    let configs = enumerate_configurations(&nfg, caps)?;
    r.kv("count", configs.len());
    for c in &configs {
        r.kv("config", format!("{} g={}", format_symbols(&c.config.0), format_rational(&c.exact_value(&nfg))));
    }
    let code = half_edge_code(&nfg, caps)?;
    let words: Vec<String> = code.iter().map(|w| format_symbols(w)).collect();
    r.kv("half_edge_code", words.join(","));
    let rep = check_represents_code(&nfg, &code, caps)?;
    r.kv("represents_code", rep.represents);
    r.kv("t_n", rep.t_n.map_or("none".to_string(), |t| t.to_string()));
    Ok(r)
}

fn five_checks_cover(caps: &Caps) -> CliResult<Report> {
    let nfg = five_checks();
    let target = five_checks_beta(&nfg);
    let mut r = Report::new();
    'search: for spec in enumerate_covers(&nfg, 2, caps)? {
        let cover = build_cover(&spec)?;
        for c in enumerate_configurations(&cover.nfg, caps)? {
            if phi_m(&spec, &cover, &c.config)? == target {
                r.raw(&spec.emit());
                r.kv("cover_configuration", format_symbols(&c.config.0));
                break 'search;
            }
        }
    }
    r.raw(&emit_beta(&nfg, &target));
    r.kv("preimages_m2", format_rational(&preimage_count_closedform(&nfg, 2, &target)?));
    let terms = bethe_terms_exact(&nfg, &target, 1.0)?;
    r.kv("h_bethe", fixed(terms.h_bethe, 10));
    r.kv("u_bethe", fixed(terms.u_bethe, 10));
    Ok(r)
}

fn dumbbell_zgibbs(caps: &Caps) -> CliResult<Report> {
    let nfg = dumbbell();
    let mut r = Report::new();
    r.kv("z_gibbs_exact", format_rational(&gibbs_partition_exact(&nfg, caps)?));
    r.kv("z_gibbs_circuit_rank", cycle_code_zgibbs(&nfg)?);
    let mut multiset: BTreeMap<BigRational, usize> = BTreeMap::new();
    let mut covers = 0usize;
    for spec in enumerate_covers(&nfg, 2, caps)? {
        covers += 1;
        *multiset.entry(gibbs_partition_exact(&build_cover(&spec)?.nfg, caps)?).or_default() += 1;
    }
    r.kv("covers_m2", covers);
    for (z, k) in multiset {
        r.kv("z_gibbs", format!("{} covers={k}", format_rational(&z)));
    }
    Ok(r)
}

fn dumbbell_zbethe2(caps: &Caps) -> CliResult<Report> {
    let nfg = dumbbell();
    let by_covers = zbethe_m_enumeration(&nfg, 2, 1.0, caps)?;
    let by_types = zbethe_m_typesum(&nfg, 2, 1.0, caps)?;
    let (Some(a), Some(b)) = (&by_covers.exact_average, &by_types.exact_average) else {
        return Err(Error::Unsupported("exact average unavailable".into()).into());
    };
    let root = if a.is_integer() { a.numer().to_string() } else { format_rational(a) };
    let mut r = Report::new();
    r.kv("summary", format!("Z_B,2 = sqrt({root}) = {:.8}", by_covers.value));
    r.kv("average_exact_covers", format_rational(a));
    r.kv("average_exact_types", format_rational(b));
    r.kv("agree", a == b);
    r.kv("z_bethe_2", format!("{:.12}", by_covers.value));
    Ok(r)
}

/// Fixed-point rendering that prints values rounding to zero without a sign.
fn fixed(x: f64, digits: usize) -> String {
    let text = format!("{x:.digits$}");
    match text.strip_prefix('-') {
        Some(rest) if rest.chars().all(|c| c == '0' || c == '.') => rest.to_string(),
        _ => text,
    }
}

/// First differing line between `got` and `want`, for diagnostics.
pub fn first_difference(got: &str, want: &str) -> Option<(usize, String, String)> {
    let (g, w): (Vec<&str>, Vec<&str>) = (got.lines().collect(), want.lines().collect());
    (0..g.len().max(w.len())).find(|&i| g.get(i) != w.get(i)).map(|i| {
        (i + 1, g.get(i).unwrap_or(&"<end>").to_string(), w.get(i).unwrap_or(&"<end>").to_string())
    })
}
