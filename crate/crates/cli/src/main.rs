//! `tfhom`: command-line front end for the Thomas–Fermi homology solvers.
//!
//! Tables go to `--output` (stdout by default) as CSV; the JSON summary goes
//! to `--summary` (stderr by default). With `--format json` only the summary
//! is written, to `--output`.
//!
//! Exit codes: 0 success, 2 precondition violation, 3 numerical failure,
//! 4 bound exceeded (compare / invariance / reconstruct).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::{Format, Sink};

#[derive(Debug, Parser)]
#[command(name = "tfhom", version, args_override_self = true, about = "Thomas-Fermi / Emden-Fowler solvers via homology-invariant reduction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output format: csv table, or json summary only.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Table (csv) or summary (json) destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// JSON summary destination in csv mode; stderr when absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Config file of key=value lines (flags given explicitly take precedence).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the Emden-Fowler (or Lane-Emden) equation directly.
    Solve(commands::SolveArgs),
    /// Find the critical Thomas-Fermi initial slope by bisection.
    Shoot(commands::ShootArgs),
    /// Solve the reduced Majorana equation on [0, 1] with u(1) = 1.
    Majorana(commands::MajoranaArgs),
    /// Rebuild (t, x, y) from a reduced solution.
    Reconstruct(commands::ReconstructArgs),
    /// Compare the reconstructed solution with direct integration.
    Compare(commands::CompareArgs),
    /// Check chart invariance under homology scalings.
    Invariance(commands::InvarianceArgs),
}

fn fail(code: u8, class: &str, msg: impl std::fmt::Display) -> ExitCode {
    let msg = msg.to_string().replace('\n', " ");
    eprintln!("error[{class}]: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => return fail(2, "precondition", e),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            return fail(2, "precondition", first);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let (out, result) = match cli.command {
        Command::Solve(a) => (a.out.clone(), commands::solve(&a)),
        Command::Shoot(a) => (a.out.clone(), commands::shoot(&a)),
        Command::Majorana(a) => (a.out.clone(), commands::majorana(&a)),
        Command::Reconstruct(a) => (a.out.clone(), commands::reconstruct(&a)),
        Command::Compare(a) => (a.out.clone(), commands::compare(&a)),
        Command::Invariance(a) => (a.out.clone(), commands::invariance(&a)),
    };
    let report = match result {
        Ok(r) => r,
        Err(commands::CliError::Lib(e)) if e.is_precondition() => return fail(2, "precondition", e),
        Err(commands::CliError::Lib(e)) => return fail(3, "numerical", e),
        Err(commands::CliError::Input(m)) => return fail(2, "precondition", m),
    };
    let sink = Sink { format: out.format, output: out.output, summary: out.summary };
    if let Err(e) = sink.emit(&report) {
        return fail(1, "io", e);
    }
    if report.bound_exceeded {
        return fail(4, "bound", "a summary metric exceeded its configured bound");
    }
    ExitCode::SUCCESS
}
