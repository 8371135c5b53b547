use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use prsim::cli;

#[derive(Parser)]
#[command(name = "prsim", version, about = "Peer-review market simulator")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation; writes issues.csv, rejections.csv and manifest.
    Run {
        /// Config file in the key = value schema.
        #[arg(long)]
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Sweep a parameter; writes sweep.csv and sweep_summary.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Parameter to sweep (currently: n).
        #[arg(long)]
        param: String,
        /// Comma list (400,600) or range (400:5000:200).
        #[arg(long)]
        values: String,
        /// Replications per value.
        #[arg(long, default_value_t = 5)]
        reps: u32,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Calibrate the quality distribution and print shape, scale, tail mass.
    Calibrate {
        #[arg(long)]
        mean: f64,
        #[arg(long = "high-count")]
        high_count: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        theta1: f64,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = match args.command {
        Command::Run { config, seed, out } => cli::run_command(&config, seed, &out),
        Command::Sweep { config, param, values, reps, out } => {
            cli::sweep_command(&config, &param, &values, reps, &out)
        }
        Command::Calibrate { mean, high_count, n, theta1 } => {
            cli::calibrate_command(mean, high_count, n, theta1)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
