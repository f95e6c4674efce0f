use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use gerbecalc::cli::{self, CliError, Command, RunConfig};

/// Runs one verification suite and writes a JSON report.
#[derive(Debug, Parser)]
#[command(name = "gerbecalc", version)]
struct Args {
    /// form-identities, normalization, pw, mickelsson, deligne, mc-class, cs, transition, lemma6 or branes
    #[arg(long)]
    command: Option<String>,
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    level: Option<i64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Built-in model id (z12, band) or a model file.
    #[arg(long)]
    model: Option<String>,
    /// Mesh file for the normalization suite.
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long)]
    tolerance_scale: Option<f64>,
    /// Report destination; stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn main_inner(args: Args) -> Result<i32, CliError> {
    let file = match &args.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let command = args.command.as_deref().map(str::parse::<Command>).transpose()?;
    let flags = RunConfig {
        command,
        level: args.level,
        seed: args.seed,
        resolution: args.resolution,
        mesh: args.mesh,
        model: args.model,
        samples: args.samples,
        tolerance_scale: args.tolerance_scale,
        ..Default::default()
    };
    let config = file.merged(flags);
    cli::configure_threads()?;
    let report = cli::run(&config)?;
    let json = report.to_json();
    match &args.report {
        Some(p) => std::fs::write(p, json + "\n").map_err(|source| CliError::File { path: p.clone(), source })?,
        None => println!("{json}"),
    }
    for c in &report.checks {
        eprintln!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    match main_inner(Args::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("gerbecalc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
