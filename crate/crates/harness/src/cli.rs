//! `bco run|sweep|verify`.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::ConfigFile;
use crate::runner::{run_command, sweep_command, Overrides};
use crate::suites::{run_suite, SUITES};
use crate::HarnessError;

#[derive(Debug, Parser)]
#[command(name = "bco", version, about = "Prediction-adaptive bandit convex optimization experiments")]
pub struct Cli {
    /// Worker threads for replicates (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Include per-round traces in the JSON reports.
    #[arg(long, global = true)]
    pub trace: bool,
    /// Output directory (overrides `out` in the configuration).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Check the one-step inequality and the Hedge bound every round.
    #[arg(long = "debug-assert", global = true)]
    pub debug_assert: bool,
    /// Base seed override.
    #[arg(long = "seed", env = "BCO_SEED", global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every (seed × algorithm) cell of a configuration.
    Run { config: PathBuf },
    /// Run a configuration over its [sweep] grid and fit the scaling slope.
    Sweep { config: PathBuf },
    /// Run a verification suite and print a pass/fail table.
    Verify { suite: String },
}

/// Parse `args`, execute, and return the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), HarnessError> {
    let ov = Overrides {
        workers: cli.workers,
        trace: cli.trace,
        debug_assert: cli.debug_assert,
        out: cli.out.clone(),
        base_seed: cli.seed,
    };
    if ov.workers == Some(0) {
        return Err(HarnessError::Config("--workers must be positive".into()));
    }
    match &cli.command {
        Command::Run { config } => run_command(&ConfigFile::load(config)?, &ov),
        Command::Sweep { config } => sweep_command(&ConfigFile::load(config)?, &ov),
        Command::Verify { suite } => verify(suite, cli.workers),
    }
}

fn verify(suite: &str, workers: Option<usize>) -> Result<(), HarnessError> {
    if !SUITES.contains(&suite) {
        return Err(HarnessError::Config(format!("unknown suite `{suite}`; available: {}", SUITES.join(", "))));
    }
    let checks = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Runtime(e.to_string()))?
            .install(|| run_suite(suite)),
        None => run_suite(suite),
    }
    .expect("suite name checked above");
    for c in &checks {
        println!("{c}");
    }
    let failed: Vec<String> =
        checks.iter().filter(|c| !c.pass).map(|c| format!("{} (measured {:.6e})", c.name, c.measured)).collect();
    println!("{} of {} checks passed", checks.len() - failed.len(), checks.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::Verify(failed.join("; ")))
    }
}
