//! `agethresh`: analysis, optimization and simulation of threshold-ALOHA.

mod commands;
mod output;
mod parse;
mod policy;
mod sweep;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "agethresh",
    version,
    about = "Threshold-ALOHA analysis and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact active-count distribution for a finite network.
    Analyze(commands::AnalyzeArgs),
    /// Roots of the large-network log-ratio function and the selected regime.
    Roots(commands::RootsArgs),
    /// Minimize the limiting AoI over (r, alpha).
    Optimize(commands::OptimizeArgs),
    /// Run one Monte Carlo simulation.
    Simulate(commands::SimulateArgs),
    /// Simulate a grid of network sizes and seeds, or tabulate G e^-G.
    Sweep(sweep::SweepArgs),
    /// Compare the closed-form distribution with brute-force enumeration.
    Oracle(commands::OracleArgs),
    /// Mean and standard error over seeds of sweep CSV files.
    Summarize(sweep::SummarizeArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => commands::analyze(&a),
        Command::Roots(a) => commands::roots(&a),
        Command::Optimize(a) => commands::optimize(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Sweep(a) => sweep::sweep(&a),
        Command::Oracle(a) => commands::oracle(&a),
        Command::Summarize(a) => sweep::summarize(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// A closed downstream pipe (`agethresh ... | head`) is not a failure.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    use std::io::ErrorKind::BrokenPipe;
    e.chain().any(|c| {
        c.downcast_ref::<std::io::Error>()
            .is_some_and(|io| io.kind() == BrokenPipe)
            || c.downcast_ref::<serde_json::Error>()
                .and_then(|j| j.io_error_kind())
                == Some(BrokenPipe)
            || c.downcast_ref::<csv::Error>().is_some_and(
                |c| matches!(c.kind(), csv::ErrorKind::Io(io) if io.kind() == BrokenPipe),
            )
    })
}
