use std::path::PathBuf;
use std::process::ExitCode;

use canyonsim_cli::{commands, config, AppError};
use clap::{Parser, Subcommand};

const LONG_ABOUT: &str = "\
Deterministic urban-canyon GNSS multipath simulator.

Exit codes:
  0  success
  2  config or parameter error
  3  I/O error (including missing artifacts)
  4  verification criteria failed

The master seed can also be set through the CANYONSIM_SEED environment
variable; an explicit --seed wins over it.";

#[derive(Parser)]
#[command(name = "canyonsim", version, about = "Urban-canyon GNSS multipath simulator", long_about = LONG_ABOUT)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Suppress informational output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one city and write its geometry JSON.
    Generate {
        /// Scenario config JSON; defaults used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the Rice non-centrality (mean-ish building height), meters.
        #[arg(long, allow_negative_numbers = true)]
        nu: Option<f64>,
        /// Master seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Output geometry JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the multi-environment sweep and write all artifacts.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (created if absent).
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Override the swept nu values, comma separated (e.g. --nu 5,25,60).
        #[arg(long, value_delimiter = ',')]
        nu: Option<Vec<f64>>,
    },
    /// Export per-epoch satellite states (ENU position, elevation, azimuth) as CSV.
    Satellites {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-check the acceptance criteria against a completed sweep directory.
    Verify {
        /// Directory written by `canyonsim sweep`.
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Generate { config, nu, seed, out } => {
            commands::generate(config.as_deref(), nu, seed, &out, cli.quiet)
        }
        Command::Sweep { config, out, seed, nu } => {
            commands::run_sweep(config.as_deref(), &out, seed, nu, cli.quiet)
        }
        Command::Satellites { config, out, seed } => {
            commands::satellites(config.as_deref(), &out, seed, cli.quiet)
        }
        Command::Verify { out } => commands::verify_dir(&out, cli.quiet),
    }
}

fn main() -> ExitCode {
    // make the env var name discoverable next to the flag docs
    let _ = config::SEED_ENV_VAR;
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("canyonsim: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
