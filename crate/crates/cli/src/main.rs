//! `qrng-entropy`: min-entropy analysis and randomness extraction for a
//! Gaussian-noise quantum source read out by a saturating converter.
//!
//! Every subcommand is deterministic given its flags and seeds. Exit codes:
//! 0 on success, 2 for configuration and i/o problems, 3 when a numerical
//! routine fails to converge or the data admits no answer.

mod analyze;
mod args;
mod extract;
mod optimize;
mod simulate;
mod tables;

use clap::{Parser, Subcommand};
use qrng_entropy::Error;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "qrng-entropy",
    version,
    about = "Secure-randomness budgeting for a Gaussian quantum source behind a saturating ADC",
    after_help = "Relative output paths are resolved against $QRNG_ENTROPY_OUTDIR when it is set."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Entropy figures for one model at one converter range
    Analyze(analyze::AnalyzeArgs),
    /// Solve for the entropy-maximizing converter range, or sweep an axis
    Optimize(optimize::OptimizeArgs),
    /// Draw digitized samples into a raw file with a JSON sidecar
    Simulate(simulate::SimulateArgs),
    /// Hash a raw sample file down to nearly uniform bits with a manifest
    Extract(extract::ExtractArgs),
    /// Regenerate the optimized-entropy reference tables as CSV
    Tables(tables::TablesArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Analyze(args) => analyze::run(args),
        Command::Optimize(args) => optimize::run(args),
        Command::Simulate(args) => simulate::run(args),
        Command::Extract(args) => extract::run(args),
        Command::Tables(args) => tables::run(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 3 for numerical failures (nothing about the invocation was wrong, the
/// computation itself gave up), 2 for everything else.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::BracketFailure { .. }
        | Error::ScanFailure { .. }
        | Error::QuadratureNonConvergence { .. }
        | Error::NoQuantumClearance { .. }
        | Error::ConstantInput => 3,
        _ => 2,
    }
}
