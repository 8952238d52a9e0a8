//! Command-line front end: run single scenarios, sweep substitution
//! series, and emit time-series, portrait, and metric files.
//!
//! Exit codes: 0 on success, 1 on simulation or solver failure, 2 on
//! usage or I/O errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "gridfreq",
    about = "Phasor-domain frequency-response simulator for SG/GFM fleets",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Scenario file, or a directory containing scenario.toml
    scenario: PathBuf,
    /// Output directory (created if missing)
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    /// Override the integration step, seconds
    #[arg(long)]
    dt: Option<f64>,
    /// Override the simulation horizon, seconds
    #[arg(long)]
    duration: Option<f64>,
    /// Override the ROCOF sliding window, seconds
    #[arg(long)]
    window: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write time-series and metrics files
    Run(CommonArgs),
    /// Run an SG-to-GFM substitution series and tabulate the metrics
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated SG names to replace, in order; defaults to every
        /// SG in scenario order
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<String>>,
    },
    /// Simulate one scenario and write per-device frequency-power portraits
    Portrait(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => commands::run(&args.scenario, &args.out, args.overrides())
            .and_then(|o| o.verify().map(|_| o.log)),
        Command::Sweep { common, order } => {
            let order_refs: Option<Vec<&str>> = order.as_ref().map(|v| {
                v.iter()
                    .map(String::as_str)
                    .filter(|s| !s.is_empty())
                    .collect()
            });
            commands::sweep(
                &common.scenario,
                &common.out,
                common.overrides(),
                order_refs.as_deref(),
            )
        }
        Command::Portrait(args) => commands::portrait(&args.scenario, &args.out, args.overrides())
            .and_then(|o| o.verify().map(|_| o.log)),
    };
    match result {
        Ok(log) => {
            print!("{log}");
            ExitCode::SUCCESS
        }
        Err(commands::CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(commands::CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

impl CommonArgs {
    fn overrides(&self) -> commands::Overrides {
        commands::Overrides {
            dt: self.dt,
            duration: self.duration,
            window: self.window,
        }
    }
}
