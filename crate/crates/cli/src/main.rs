use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod config;
mod dim;
mod estimate;
mod input;
mod simulate;
mod sval;
mod verify;

/// Dimensions of graphs and ranges of self-affine random fields.
#[derive(Parser, Debug)]
#[command(name = "affdim", version)]
struct Cli {
    /// TOML file with defaults; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,

    /// Worker threads (output does not depend on this).
    #[arg(long, global = true, env = "AFFDIM_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Affinity exponents from exponent matrices or from W and x.
    Sval(sval::Args),
    /// Dimension formulas for a model family, with identity checks.
    Dim(dim::Args),
    /// Simulate sample paths to CSV.
    Simulate(simulate::Args),
    /// Estimators on simulated or loaded paths.
    #[command(subcommand)]
    Estimate(estimate::Command),
    /// Statistical checks on simulated paths.
    #[command(subcommand)]
    Verify(verify::Command),
}

#[derive(Debug)]
pub enum Failure {
    Lib(affdim::Error),
    /// A check ran but its tolerance was breached.
    Breach(String),
}

impl From<affdim::Error> for Failure {
    fn from(e: affdim::Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

pub type Outcome = Result<(), Failure>;

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| affdim::Error::Input(format!("cannot start {n} worker threads: {e}")))?;
    }
    match cli.command {
        Command::Sval(a) => sval::run(a),
        Command::Dim(a) => dim::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Estimate(c) => estimate::run(c),
        Command::Verify(c) => verify::run(c),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match config::parse_with_config::<Cli>(&argv) {
        Ok(cli) => cli,
        Err(config::ParseError::Clap(e)) => e.exit(),
        Err(config::ParseError::Config(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(Failure::Breach(msg)) => {
            eprintln!("tolerance breached: {msg}");
            ExitCode::from(4)
        }
    }
}
