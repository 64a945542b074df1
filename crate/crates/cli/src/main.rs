use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use star_noma::scenario::AxisKind;
use star_noma_cli::commands::{cmd_figure, cmd_point, cmd_sweep, FigureArgs, PointArgs, RunSummary, SweepArgs};
use star_noma_cli::output::Format;
use star_noma_cli::presets::Figure;
use star_noma_cli::CliError;

/// BER simulation of downlink NOMA through a STAR-RIS.
#[derive(Debug, Parser)]
#[command(name = "star-noma", version)]
struct Cli {
    /// Worker threads for the Monte Carlo engine (results do not depend on it).
    #[arg(long, global = true, env = "STAR_NOMA_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Budget {
    /// Stop a point after this many bit errors [default: 200].
    #[arg(long)]
    min_errors: Option<u64>,
    /// Stop a point after this many trials even with fewer errors [default: 1e9].
    #[arg(long)]
    max_trials: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one SNR point and print it next to the analytic values.
    Point {
        config: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        snr_db: f64,
        /// Only this user (1-based); all users by default.
        #[arg(long)]
        user: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        budget: Budget,
    },
    /// Sweep SNR, element count or a_1 and write one table.
    Sweep {
        config: PathBuf,
        #[arg(long, value_parser = parse_axis)]
        axis: Option<AxisKind>,
        /// `start:step:stop` or a comma list.
        #[arg(long, allow_hyphen_values = true)]
        values: Option<String>,
        #[arg(long, value_delimiter = ',')]
        users: Option<Vec<usize>>,
        /// SNR of element and power sweeps [default: 40].
        #[arg(long, allow_negative_numbers = true)]
        snr_db: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        budget: Budget,
    },
    /// Regenerate the curves of a preset figure.
    Figure {
        #[arg(value_enum)]
        name: Figure,
        /// Preset parameters as key=value, e.g. `--set n=25,50 --set snr=0:5:30`.
        #[arg(long = "set", value_name = "KEY=VALUE", allow_hyphen_values = true)]
        overrides: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[command(flatten)]
        budget: Budget,
    },
}

fn parse_axis(s: &str) -> Result<AxisKind, String> {
    s.parse().map_err(|e: star_noma::Error| e.to_string())
}

fn report(summary: RunSummary) -> Result<(), CliError> {
    let summary = summary.into_result()?;
    for w in &summary.manifest.warnings {
        eprintln!("warning: {w}");
    }
    for f in &summary.manifest.files {
        println!("{f}");
    }
    println!("{}", summary.manifest_path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::usage("--threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    match cli.command {
        Command::Point {
            config,
            snr_db,
            user,
            seed,
            budget,
        } => {
            let lines = cmd_point(&PointArgs {
                config,
                snr_db,
                user,
                seed,
                min_errors: budget.min_errors,
                max_trials: budget.max_trials,
            })?;
            for line in lines {
                println!("{line}");
            }
            Ok(())
        }
        Command::Sweep {
            config,
            axis,
            values,
            users,
            snr_db,
            out,
            format,
            seed,
            budget,
        } => report(cmd_sweep(&SweepArgs {
            config,
            axis,
            values,
            users,
            snr_db,
            out,
            format,
            seed,
            min_errors: budget.min_errors,
            max_trials: budget.max_trials,
        })?),
        Command::Figure {
            name,
            overrides,
            seed,
            out,
            format,
            budget,
        } => report(cmd_figure(&FigureArgs {
            figure: name,
            overrides,
            seed,
            out,
            format,
            min_errors: budget.min_errors,
            max_trials: budget.max_trials,
        })?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
