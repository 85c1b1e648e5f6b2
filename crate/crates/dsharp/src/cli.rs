//! Argument parsing and report writing.

use std::path::Path;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::commands::{self, Common, Output, Report, Table, SCHEMA_VERSION};
use crate::io;

#[derive(Parser, Debug)]
#[command(name = "dsharp", version, about = "Check, repair and use an imperfect model-0 against data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Estimate and OPEN-select the comparison density, repair model-0
    Fit(commands::FitArgs),
    /// Chi-square test and divergences of model-0 against the data
    Diagnose(commands::DiagnoseArgs),
    /// Bootstrap action profile, robust and minimax actions
    Decide(commands::DecideArgs),
    /// Density from quantile-probability pairs
    Q2d(commands::Q2dArgs),
    /// Relevance-weighted consensus of expert models
    Combine(commands::CombineArgs),
    /// Grid posterior from a divergence kernel
    Gbayes(commands::GbayesArgs),
    /// Draw data from a (possibly sharpened) model
    Simulate(commands::SimulateArgs),
}

/// JSON text of a report; identical inputs give identical bytes.
pub fn render<C: Serialize, R: Serialize>(command: &'static str, seed: u64, config: &C, result: &R) -> Result<String> {
    let report = Report { schema_version: SCHEMA_VERSION, command, seed, config, result };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    Ok(text)
}

fn emit<C: Serialize, R: Serialize>(command: &'static str, common: &Common, config: &C, out: Output<R>) -> Result<()> {
    let text = render(command, common.seed, config, &out.result)?;
    if let Some(path) = &common.curves {
        write_table(path, &out.curves)?;
    }
    io::write_text(common.out.as_deref(), &text)
}

fn write_table(path: &Path, t: &Table) -> Result<()> {
    let header: Vec<&str> = t.header.iter().map(String::as_str).collect();
    let columns: Vec<&[f64]> = t.columns.iter().map(Vec::as_slice).collect();
    io::write_columns(path, &header, &columns)
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Fit(a) => emit("fit", &a.common, a, commands::fit(a)?),
        Command::Diagnose(a) => emit("diagnose", &a.common, a, commands::diagnose(a)?),
        Command::Decide(a) => emit("decide", &a.common, a, commands::decide(a)?),
        Command::Q2d(a) => emit("q2d", &a.common, a, commands::q2d(a)?),
        Command::Combine(a) => emit("combine", &a.common, a, commands::combine(a)?),
        Command::Gbayes(a) => emit("gbayes", &a.common, a, commands::gbayes(a)?),
        Command::Simulate(a) => {
            let (sample, result) = commands::simulate(a)?;
            io::write_data(a.out.as_deref(), &sample)?;
            if let Some(path) = &a.report {
                io::write_text(Some(path), &render("simulate", a.seed, a, &result)?)?;
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct Failure {
    schema_version: u32,
    error: String,
    causes: Vec<String>,
}

/// Runs the parsed command; on failure prints a JSON error object to stderr
/// and returns a nonzero exit code.
pub fn run(cli: &Cli) -> ExitCode {
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let failure = Failure {
                schema_version: SCHEMA_VERSION,
                error: e.to_string(),
                causes: e.chain().skip(1).map(|c| c.to_string()).collect(),
            };
            let text = serde_json::to_string(&failure).unwrap_or_else(|_| format!("{{\"error\":{:?}}}", e.to_string()));
            eprintln!("{text}");
            ExitCode::FAILURE
        }
    }
}
