mod commands;
mod config;
mod failure;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::JobArgs;
use failure::{Failure, EXIT_PARSE};

/// Constant-curvature metrics with conical singularities on the Riemann
/// sphere, built from third-kind differentials.
#[derive(Parser, Debug)]
#[command(name = "csc-forge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Divisor, residues and hypothesis report of a form.
    Inspect(JobArgs),
    /// Integration constant and pole limits of Φ.
    Phi(JobArgs),
    /// CSV grid `x,y,rho,phi,K_est`.
    Metric(JobArgs),
    /// Predicted and fitted cone angles.
    Angles(JobArgs),
    /// Area integral against 2π(χ + deg D).
    GaussBonnet(JobArgs),
    /// Standard form, football and reduction check.
    Classify(JobArgs),
    /// All checks bundled into one JSON report.
    Verify(JobArgs),
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("CSC_FORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::parse(format!("CSC_FORGE_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::parse(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    configure_threads()?;
    let (args, cmd): (&JobArgs, fn(&config::JobConfig) -> Result<u8, Failure>) = match &cli.command {
        Command::Inspect(a) => (a, commands::inspect),
        Command::Phi(a) => (a, commands::phi),
        Command::Metric(a) => (a, commands::metric),
        Command::Angles(a) => (a, commands::angles),
        Command::GaussBonnet(a) => (a, commands::gauss_bonnet),
        Command::Classify(a) => (a, commands::classify),
        Command::Verify(a) => (a, commands::verify),
    };
    cmd(&args.resolve()?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
