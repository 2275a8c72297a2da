use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fusionkit::config::Overrides;
use fusionkit::harness::{worker_threads, THREADS_ENV};
use fusionkit::{commands, exit, output, AppError};

/// Recognition and identification fusion toolkit.
#[derive(Parser)]
#[command(name = "fusionkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo classification experiment per feature subset.
    Simulate(SimulateArgs),
    /// Combine two mass-function files with Dempster's rule.
    Evidence { first: PathBuf, second: PathBuf },
    /// Fuse a report stream into per-step class posteriors.
    Classify {
        reports: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory [default: the config's `out`].
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML config; the shipped default is used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subsets of the tokens v, a, L, e.g. `v,L,v+L+a`.
    #[arg(long, value_delimiter = ',')]
    features: Option<Vec<String>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Simulate(a) => {
            let threads = worker_threads(std::env::var(THREADS_ENV).ok().as_deref())?;
            let overrides = Overrides { runs: a.runs, steps: a.steps, seed: a.seed, features: a.features, out: a.out };
            let (config, summaries) = commands::simulate_with(a.config.as_deref(), &overrides, threads)?;
            print!("{}", output::render_report(&summaries, config.experiment.seed));
        }
        Command::Evidence { first, second } => print!("{}", commands::evidence(&first, &second)?),
        Command::Classify { reports, config, out } => {
            let config = commands::load_config(config.as_deref())?;
            let out = out.unwrap_or_else(|| config.experiment.out.clone());
            let path = commands::classify(&reports, &config, &out)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
