//! `xchg`: simulations, gap estimates, verification suites and bound tables
//! for the stochastic energy-exchange model.

mod bounds;
mod gap;
mod output;
mod simulate;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "xchg", version, about = "Energy-exchange model laboratory")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Base seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Tolerance for floating comparisons in verification.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate trajectories; `--out` receives the event file.
    Simulate(simulate::SimulateArgs),
    /// Spectral gap estimates over a (gamma, N) grid.
    Gap(gap::GapArgs),
    /// Run verification suites; exit status 1 on any failure.
    Verify(verify::VerifyArgs),
    /// Closed-form bounds and the inductive chain.
    Bounds(bounds::BoundsArgs),
}

#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration; exit status 2.
    Usage(String),
    /// A verification failed or output could not be written; exit status 1.
    Failed(String),
}

impl From<xchg_core::Error> for CliError {
    fn from(e: xchg_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(format!("I/O error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.global.tol <= 0.0 || !cli.global.tol.is_finite() {
        eprintln!("error: --tol must be positive");
        return ExitCode::from(2);
    }
    if let Some(t) = cli.global.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let res = match &cli.command {
        Command::Simulate(a) => simulate::run(a, &cli.global),
        Command::Gap(a) => gap::run(a, &cli.global),
        Command::Verify(a) => verify::run(a, &cli.global),
        Command::Bounds(a) => bounds::run(a, &cli.global),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Failed(m)) => {
            eprintln!("{m}");
            ExitCode::from(1)
        }
    }
}
