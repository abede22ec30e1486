use std::collections::BTreeMap;
use std::path::Path;

use gcb_core::beta::{emit_beta_f64, parse_beta};
use gcb_core::bethe::{
    bethe_terms, bme_completion, minimize_bethe, sum_product, zbethe_m_enumeration, zbethe_m_monte_carlo,
    zbethe_m_typesum, MinimizeOptions, SpaOptions,
};
use gcb_core::coding::{
    absorb_channel, attach_channel, bgcd, bgcd_degree_m, bmapd, nfg_from_parity_check, sgcd, sgcd_degree_m, smapd,
    Channel, DecodingNfg, ParityCheckMatrix,
};
use gcb_core::counting::{preimage_count_bruteforce, preimage_count_closedform};
use gcb_core::covers::{build_cover, count_covers, enumerate_covers, random_cover};
use gcb_core::gibbs::{gibbs_partition, gibbs_partition_exact, log_gibbs_partition};
use gcb_core::ldpc_curves::{curve_scan, to_csv};
use gcb_core::nfg::format::parse_nfg;
use gcb_core::nfg::{enumerate_configurations, format_symbols, Symbol};
use gcb_core::rational::format_rational;
use gcb_core::{Caps, Error, Nfg};
use num_rational::BigRational;
use rayon::prelude::*;

use crate::cli::*;
use crate::error::{CliError, CliResult};
use crate::report::{floats, Report};

pub struct Context {
    pub caps: Caps,
    pub precision: Precision,
}

pub fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

pub fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn load_nfg(path: &Path) -> CliResult<Nfg> {
    Ok(parse_nfg(&read(path)?)?)
}

/// Whitespace- or comma-separated symbols; `#` starts a comment.
fn parse_received(text: &str) -> CliResult<Vec<Symbol>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        for token in content.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            let s = token.parse().map_err(|_| Error::Parse { line: i + 1, message: format!("bad symbol `{token}`") })?;
            out.push(s);
        }
    }
    if out.is_empty() {
        return Err(Error::Parse { line: 1, message: "received vector is empty".into() }.into());
    }
    Ok(out)
}

pub fn enumerate(ctx: &Context, args: &NfgArg) -> CliResult<Report> {
    let nfg = load_nfg(&args.nfg)?;
    let configs = enumerate_configurations(&nfg, &ctx.caps)?;
    let mut r = Report::new();
    r.kv("edges", nfg.edges().iter().map(|e| e.id.as_str()).collect::<Vec<_>>().join(","));
    r.kv("count", configs.len());
    for c in &configs {
        let value = match ctx.precision {
            Precision::Exact => format_rational(&c.exact_value(&nfg)),
            Precision::Float => c.value.to_string(),
        };
        r.kv("config", format!("{} g={value}", format_symbols(&c.config.0)));
    }
    Ok(r)
}

pub fn zgibbs(ctx: &Context, args: &ZgibbsArgs) -> CliResult<Report> {
    let nfg = load_nfg(&args.nfg)?;
    let t = args.temperature;
    let mut r = Report::new();
    r.kv("temperature", t);
    r.kv("z_gibbs", gibbs_partition(&nfg, t, &ctx.caps)?);
    r.kv("log_z_gibbs", log_gibbs_partition(&nfg, t, &ctx.caps)?);
    if ctx.precision == Precision::Exact && (t == 1.0 || nfg.is_indicator()) {
        r.kv("z_gibbs_exact", format_rational(&gibbs_partition_exact(&nfg, &ctx.caps)?));
    }
    Ok(r)
}

pub fn zbethe_m(ctx: &Context, args: &ZbetheMArgs) -> CliResult<Report> {
    let nfg = load_nfg(&args.nfg)?;
    let mut r = Report::new();
    r.kv("m", args.m).kv("temperature", args.temperature);
    let part = match args.method {
        ZbetheMethod::MonteCarlo => {
            let seed = args.seed.ok_or_else(|| CliError::Usage("--method monte-carlo needs --seed".into()))?;
            let mc = zbethe_m_monte_carlo(&nfg, args.m, args.temperature, args.samples, seed, &ctx.caps)?;
            r.kv("method", "monte-carlo").kv("samples", mc.samples).kv("seed", seed);
            r.kv("average", mc.mean).kv("std_error", mc.std_error).kv("z_bethe_m", mc.value);
            return Ok(r);
        }
        ZbetheMethod::Enumeration => {
            r.kv("method", "enumeration");
            zbethe_m_enumeration(&nfg, args.m, args.temperature, &ctx.caps)?
        }
        ZbetheMethod::Typesum => {
            r.kv("method", "typesum");
            zbethe_m_typesum(&nfg, args.m, args.temperature, &ctx.caps)?
        }
    };
    if let (Precision::Exact, Some(exact)) = (ctx.precision, &part.exact_average) {
        r.kv("average_exact", format_rational(exact));
    }
    r.kv("average", part.average).kv("z_bethe_m", part.value);
    Ok(r)
}

pub fn zbethe_min(_ctx: &Context, args: &ZbetheMinArgs) -> CliResult<Report> {
    let nfg = load_nfg(&args.nfg)?;
    let opts = MinimizeOptions { starts: args.starts, seed: args.seed, max_iters: args.max_iters, ..Default::default() };
    let min = minimize_bethe(&nfg, args.temperature, &opts)?;
    let mut r = Report::new();
    r.kv("temperature", min.temperature).kv("f_min", min.f_min);
    if let Some(z) = min.z_bethe {
        r.kv("z_bethe", z);
    }
    r.kv("converged", min.converged).kv("iterations", min.iterations).kv("grad_norm", min.grad_norm);
    r.kv("tie", min.tie).kv("minimizers", min.minimizers.len());
    if let Some(path) = &args.beta_out {
        write(path, &emit_beta_f64(&nfg, &min.beta))?;
    }
    if !min.converged {
        r.nonconverged = Some(format!("gradient norm {:e} after {} iterations", min.grad_norm, min.iterations));
    }
    Ok(r)
}

pub fn preimage_count(ctx: &Context, args: &PreimageArgs) -> CliResult<Report> {
    let nfg = load_nfg(&args.nfg)?;
    let beta = parse_beta(&nfg, &read(&args.beta)?)?;
    let (name, count) = match args.method {
        PreimageMethod::Closed => ("closed", preimage_count_closedform(&nfg, args.m, &beta)?),
        PreimageMethod::Brute => ("brute", preimage_count_bruteforce(&nfg, args.m, &beta, &ctx.caps)?),
    };
    let mut r = Report::new();
    r.kv("m", args.m).kv("method", name).kv("count", format_rational(&count));
    Ok(r)
}

pub fn covers(ctx: &Context, args: &CoversArgs) -> CliResult<Report> {
    let nfg = load_nfg(&args.nfg)?;
    let mut r = Report::new();
    r.kv("m", args.m).kv("covers", count_covers(&nfg, args.m));
    if let Some(seed) = args.random {
        r.kv("seed", seed).raw(&random_cover(&nfg, args.m, seed).emit());
    }
    if args.enumerate {
        let caps = ctx.caps;
        let zs: Vec<BigRational> = enumerate_covers(&nfg, args.m, &caps)?
            .par_bridge()
            .map(|spec| Ok(gibbs_partition_exact(&build_cover(&spec)?.nfg, &caps)?))
            .collect::<CliResult<_>>()?;
        let mut multiset: BTreeMap<BigRational, usize> = BTreeMap::new();
        for z in zs {
            *multiset.entry(z).or_default() += 1;
        }
        for (z, k) in multiset {
            r.kv("z_gibbs", format!("{} covers={k}", format_rational(&z)));
        }
    }
    Ok(r)
}

pub fn spa(_ctx: &Context, args: &SpaArgs) -> CliResult<Report> {
    let nfg = load_nfg(&args.nfg)?;
    let opts = SpaOptions {
        max_iters: args.max_iters,
        damping: args.damping,
        tol: args.tol,
        temperature: args.temperature,
        trace: args.trace.is_some(),
    };
    let res = sum_product(&nfg, &opts)?;
    let state = &res.state;
    let mut r = Report::new();
    r.kv("iterations", state.iterations).kv("residual", state.residual).kv("converged", state.converged);
    if state.converged {
        r.kv("f_bethe", bethe_terms(&nfg, &res.beliefs, args.temperature)?.f_bethe);
    }
    for (e, edge) in nfg.edges().iter().enumerate() {
        r.kv(&format!("belief.{}", edge.id), floats(&res.beliefs.edges[e]));
    }
    if let Some(path) = &args.trace {
        let mut csv = String::from("iteration,residual,f_bethe\n");
        for p in &state.trace {
            csv += &format!("{},{},{}\n", p.iteration, p.residual, p.f_bethe);
        }
        write(path, &csv)?;
    }
    if !state.converged {
        r.nonconverged = Some(format!("residual {:e} after {} sweeps", state.residual, state.iterations));
    }
    Ok(r)
}

pub fn bme(_ctx: &Context, args: &BmeArgs) -> CliResult<Report> {
    let nfg = load_nfg(&args.nfg)?;
    let res = bme_completion(&nfg, &args.omega)?;
    let mut r = Report::new();
    r.kv("h_bethe", res.h_bethe);
    for (f, duals) in res.duals.iter().enumerate() {
        if let Some(d) = duals {
            r.kv(&format!("dual.{}", nfg.factor(f).id), floats(d));
        }
    }
    if let Some(path) = &args.beta_out {
        write(path, &emit_beta_f64(&nfg, &res.beta))?;
    }
    Ok(r)
}

fn decoding_graph(ctx: &Context, args: &DecodeArgs) -> CliResult<DecodingNfg> {
    let channel = Channel::parse(&read(&args.channel)?)?;
    let y = parse_received(&read(&args.y)?)?;
    let dec = match (&args.pcm, &args.nfg, &args.symbols) {
        (Some(pcm), _, _) => {
            let h = ParityCheckMatrix::parse(&read(pcm)?)?;
            attach_channel(&nfg_from_parity_check(&h), &channel, &y, &ctx.caps)?
        }
        (None, Some(path), Some(symbols)) => {
            let refs: Vec<&str> = symbols.iter().map(String::as_str).collect();
            absorb_channel(&load_nfg(path)?, &refs, &channel, &y, &ctx.caps)?
        }
        (None, Some(path), None) => attach_channel(&load_nfg(path)?, &channel, &y, &ctx.caps)?,
        (None, None, _) => return Err(CliError::Usage("decode needs --pcm or --nfg".into())),
    };
    Ok(dec)
}

pub fn decode(ctx: &Context, args: &DecodeArgs) -> CliResult<Report> {
    let dec = decoding_graph(ctx, args)?;
    let res = match (args.decoder, args.degree) {
        (Decoder::Bmapd, None) => bmapd(&dec, &ctx.caps)?,
        (Decoder::Smapd, None) => smapd(&dec, &ctx.caps)?,
        (Decoder::Bgcd, None) => bgcd(&dec)?,
        (Decoder::Sgcd, None) => sgcd(&dec, &MinimizeOptions::default())?,
        (Decoder::Bgcd, Some(m)) => bgcd_degree_m(&dec, m, &ctx.caps)?,
        (Decoder::Sgcd, Some(m)) => sgcd_degree_m(&dec, m, &ctx.caps)?,
        (_, Some(_)) => return Err(CliError::Usage("--degree applies to bgcd and sgcd only".into())),
    };
    let mut r = Report::new();
    r.kv("decision", format_symbols(&res.decision)).kv("tie", res.tie).kv("objective", res.objective);
    r.kv("iterations", res.iterations).kv("converged", res.converged);
    for (id, m) in dec.symbol_ids().iter().zip(&res.marginals) {
        r.kv(&format!("marginal.{id}"), floats(m));
    }
    if let (Some(path), Some(beta)) = (&args.beta_out, &res.beta) {
        write(path, &emit_beta_f64(&dec.nfg, beta))?;
    }
    if !res.converged {
        r.nonconverged = Some(format!("{:?} stopped after {} iterations", args.decoder, res.iterations));
    }
    Ok(r)
}

/// Returns the report and the CSV text.
pub fn ldpc_curve(args: &LdpcArgs) -> CliResult<(Report, String)> {
    let scan = curve_scan(args.dl, args.dr, args.smin, args.smax, args.steps)?;
    let mut r = Report::new();
    r.raw(&scan.report.render());
    Ok((r, to_csv(&scan.points)))
}
