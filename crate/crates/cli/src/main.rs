//! `fundamental`: activation, spectral analysis, theorem checks and the
//! synthetic benchmark from the command line.
//!
//! Exit codes: 0 success, 2 usage error, 3 input-format error,
//! 4 numerical or assumption failure.

mod analyze;
mod bench;
mod failure;
mod io;
mod manifest;
mod sumset;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use failure::{CliResult, Failure};

/// Environment variable read when `--threads` is absent.
const THREADS_ENV: &str = "FUNDAMENTAL_THREADS";

#[derive(Debug, Parser)]
#[command(name = "fundamental", version, about = "Fundamental-component enhancement of periodic signals")]
struct Cli {
    /// Worker threads [default: $FUNDAMENTAL_THREADS, else all cores].
    /// Results do not depend on this value.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Activate a signal and write its spectrum, spectrogram and report.
    Analyze(analyze::AnalyzeArgs),
    /// Compare activated-signal quadrature with the peak asymptotics over an ε ladder.
    VerifyTheorem(verify::VerifyArgs),
    /// Seeded Monte Carlo benchmark of the fundamental energy ratio.
    SynthBench(bench::BenchArgs),
    /// Difference sets of iterated sumsets of a frequency set.
    Sumset(sumset::SumsetArgs),
}

fn configure_threads(flag: Option<usize>) -> CliResult<()> {
    let threads = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse()
                    .map_err(|_| Failure::usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(Failure::usage("thread count must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(format!("cannot start thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<u8> {
    configure_threads(cli.threads)?;
    match &cli.command {
        Command::Analyze(args) => analyze::run(args).map(|()| 0),
        Command::VerifyTheorem(args) => verify::run(args),
        Command::SynthBench(args) => bench::run(args).map(|()| 0),
        Command::Sumset(args) => sumset::run(args).map(|()| 0),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
