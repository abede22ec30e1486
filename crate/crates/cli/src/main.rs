mod cases;
mod cli;
mod commands;
mod error;
mod report;

use std::process::ExitCode;

use clap::Parser;
use gcb_core::Caps;

use crate::cli::{Cli, Command, ExamplesArgs};
use crate::commands::Context;
use crate::error::{CliError, CliResult};
use crate::report::Report;

fn examples(ctx: &Context, args: &ExamplesArgs) -> CliResult<Report> {
    let selected: Vec<&cases::Case> = match &args.case {
        Some(name) => vec![cases::find(name)?],
        None => cases::CASES.iter().collect(),
    };
    let mut all = Report::new();
    let mut mismatch = None;
    for case in selected {
        let text = (case.run)(&ctx.caps)?.to_string();
        all.kv("case", case.name).raw(&text);
        if let Some(dir) = &args.bless {
            commands::write(&dir.join(format!("{}.txt", case.name)), &text)?;
            all.kv("golden", "written");
        } else if let Some((line, got, want)) = cases::first_difference(&text, case.golden) {
            eprintln!("{}: line {line}: got `{got}`, golden `{want}`", case.name);
            all.kv("golden", "differs");
            mismatch.get_or_insert_with(|| case.name.to_string());
        } else {
            all.kv("golden", "match");
        }
    }
    match mismatch {
        Some(name) => {
            print!("{all}");
            Err(CliError::GoldenMismatch(name))
        }
        None => Ok(all),
    }
}

fn run(cli: Cli) -> CliResult<Report> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
    }
    let mut caps = Caps::from_env();
    caps.config = cli.config_cap.unwrap_or(caps.config);
    caps.cover = cli.cover_cap.unwrap_or(caps.cover);
    let ctx = Context { caps, precision: cli.precision };
    match &cli.command {
        Command::Enumerate(a) => commands::enumerate(&ctx, a),
        Command::Zgibbs(a) => commands::zgibbs(&ctx, a),
        Command::ZbetheM(a) => commands::zbethe_m(&ctx, a),
        Command::ZbetheMin(a) => commands::zbethe_min(&ctx, a),
        Command::PreimageCount(a) => commands::preimage_count(&ctx, a),
        Command::Covers(a) => commands::covers(&ctx, a),
        Command::Spa(a) => commands::spa(&ctx, a),
        Command::Bme(a) => commands::bme(&ctx, a),
        Command::Decode(a) => commands::decode(&ctx, a),
        Command::LdpcCurve(a) => {
            let (report, csv) = commands::ldpc_curve(a)?;
            match &a.out {
                Some(path) => {
                    commands::write(path, &csv)?;
                    Ok(report)
                }
                None => {
                    print!("{csv}");
                    Ok(Report::new())
                }
            }
        }
        Command::Examples(a) => examples(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(3);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(report) => {
            print!("{report}");
            match report.nonconverged {
                Some(why) => {
                    eprintln!("error: {}", CliError::NonConvergence(why));
                    ExitCode::from(4)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
