// NaN must fail positivity checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

mod commands;
mod jsonfmt;
mod problem;
mod report;

use report::Report;

#[derive(Parser, Debug)]
#[command(name = "maxsym", version, about = "Principal symbols, factorization and boundary recovery for anisotropic Maxwell systems")]
struct Cli {
    /// Also write the JSON report (or, for `gen`, the problem file) here
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print JSON on standard output instead of the table
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a seeded problem file
    Gen(commands::gen::Args),
    /// Coefficient symbols, spectra and the factorization on a direction grid
    Symbols(commands::symbols::Args),
    /// Boundary-map symbols and field symbols on a direction grid
    BoundarySymbol(commands::boundary::Args),
    /// Recover boundary data: tangential metrics, the normal row of μ̂, or jet injectivity
    Recover(commands::recover::Args),
    /// Build a boundary-fixing gauge and compare the pulled-back pair
    GaugeDemo(commands::gauge::Args),
    /// Run the property sweeps
    Verify(commands::verify::Args),
}

/// A closed pipe (`maxsym ... | head`) is not an error.
fn write_stdout(text: &str) -> anyhow::Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn emit(cli: &Cli, mut report: Report, start: Instant) -> anyhow::Result<ExitCode> {
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let json = serde_json::to_string_pretty(&report)?;
    if let Some(path) = &cli.out {
        std::fs::write(path, &json)?;
    }
    let text = if cli.json { json + "\n" } else { report.table() };
    write_stdout(&text)?;
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    let start = Instant::now();
    let argv: Vec<String> = std::env::args().collect();
    let report = match &cli.command {
        Command::Gen(a) => {
            let text = commands::gen::run(a)?;
            match &cli.out {
                Some(path) => std::fs::write(path, text + "\n")?,
                None => write_stdout(&(text + "\n"))?,
            }
            return Ok(ExitCode::SUCCESS);
        }
        Command::Symbols(a) => commands::symbols::run(a, argv)?,
        Command::BoundarySymbol(a) => commands::boundary::run(a, argv)?,
        Command::Recover(a) => commands::recover::run(a, argv)?,
        Command::GaugeDemo(a) => commands::gauge::run(a, argv)?,
        Command::Verify(a) => commands::verify::run(a, argv)?,
    };
    emit(cli, report, start)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
