//! `regobs`: strategic-placement verdicts, output simulation, placement
//! sweeps, and initial-state reconstruction for diffusion sensing, from a
//! JSON run configuration.

mod config;
mod csvio;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use regobs_core::Method;

use crate::config::{load_config, StudyConfig};
use crate::run::EXIT_USAGE;

#[derive(Parser)]
#[command(name = "regobs", version, about = "Regional observability toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the configured sensor suite is strategic.
    ///
    /// Exit code 0 means strategic, 1 not strategic, 2 configuration error.
    Strategic(CommonArgs),
    /// Simulate sensor outputs for the configured initial state (CSV).
    Simulate(CommonArgs),
    /// Evaluate verdicts over a placement grid (CSV + JSON summary).
    Sweep(CommonArgs),
    /// Recover a regional initial state from a trajectory CSV.
    Reconstruct(CommonArgs),
    /// Run the 1D pointwise study and print its report.
    Counterexample(StudyArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the verdict route from the config.
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Write the primary artifact here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed recorded in reports for seeded studies.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct StudyArgs {
    /// Optional JSON config; its `counterexample` section seeds the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Left end of the observation window.
    #[arg(long)]
    alpha: Option<f64>,
    /// Sensor position; the window is [alpha, alpha + b].
    #[arg(long)]
    b: Option<f64>,
    /// Number of retained modes.
    #[arg(long)]
    n: Option<usize>,
    /// Gramian horizon.
    #[arg(long)]
    horizon: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Accepted on every subcommand; this study is deterministic and
    /// ignores it.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Gramian,
    Rank,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Gramian => Method::Gramian,
            MethodArg::Rank => Method::Rank,
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Strategic(args) => {
            let config = load_config(&args.config)?;
            run::cmd_strategic(&config, args.method.map(Into::into), args.out.as_deref())
        }
        Command::Simulate(args) => {
            let config = load_config(&args.config)?;
            run::cmd_simulate(&config, args.out.as_deref())
        }
        Command::Sweep(args) => {
            let config = load_config(&args.config)?;
            run::cmd_sweep(
                &config,
                args.method.map(Into::into),
                args.out.as_deref(),
                args.seed,
            )
        }
        Command::Reconstruct(args) => {
            let config = load_config(&args.config)?;
            run::cmd_reconstruct(&config, args.out.as_deref())
        }
        Command::Counterexample(args) => {
            let mut study = match &args.config {
                Some(path) => load_config(path)?.counterexample.unwrap_or_default(),
                None => StudyConfig::default(),
            };
            if let Some(alpha) = args.alpha {
                study.alpha = alpha;
            }
            if let Some(b) = args.b {
                study.b = b;
            }
            if let Some(n) = args.n {
                study.n = n;
            }
            if let Some(horizon) = args.horizon {
                study.horizon = horizon;
            }
            run::cmd_counterexample(&study, args.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
