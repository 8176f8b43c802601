use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pmc_core::cli::commands::{cmd_solve, cmd_sweep, EXIT_CONFIG};
use pmc_core::cli::cmd_verify;

/// Prescribed-mean-curvature graph solver.
#[derive(Parser, Debug)]
#[command(name = "pmc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the t → 0 continuation for one config.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides output.directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Accepted for symmetry with the other commands; solves are deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run an invariant suite: geometry, oracles, bounds or all.
    Verify {
        suite: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Seeds the sampled inputs of the randomized checks.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Cartesian parameter sweep over a config with a [sweep] table.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("PMC_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_CONFIG as u8),
            };
        }
    };
    let code = match cli.command {
        Command::Solve { config, out, seed: _ } => cmd_solve(&config, out.as_deref()),
        Command::Verify { suite, out, seed } => cmd_verify(&suite, &out, seed),
        Command::Sweep { config, out, threads, seed: _ } => cmd_sweep(&config, out.as_deref(), threads),
    };
    ExitCode::from(code as u8)
}
