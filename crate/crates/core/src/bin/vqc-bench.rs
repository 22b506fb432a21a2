use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vqc_bench::harness::{self, ErrorSurfaceConfig, NoiseCurveConfig, SweepConfig};

#[derive(Parser)]
#[command(
    name = "vqc-bench",
    version,
    about = "Variational quantum classifier design-space sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample circuits, train them and write one CSV row per circuit and noise setting.
    Sweep {
        config: PathBuf,
        /// Override the worker thread count from the config.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Retrain selected circuits under a series of target error rates.
    NoiseCurve {
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Estimate per-operation error over a T1/T2 grid.
    ErrorSurface { config: PathBuf },
    /// Print the best mean accuracy per depth or per qubit count.
    Aggregate {
        csv: PathBuf,
        #[arg(long, value_enum)]
        by: GroupBy,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupBy {
    Depth,
    Qubits,
}

fn run(cli: Cli) -> vqc_bench::Result<()> {
    match cli.command {
        Command::Sweep { config, workers } => {
            let mut cfg = SweepConfig::from_file(&config)?;
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let (records, path) = harness::run_sweep(&cfg)?;
            eprintln!("wrote {} records to {}", records.len(), path.display());
        }
        Command::NoiseCurve { config, workers } => {
            let mut cfg = NoiseCurveConfig::from_file(&config)?;
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let (rows, path) = harness::run_noise_curve(&cfg)?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        Command::ErrorSurface { config } => {
            let cfg = ErrorSurfaceConfig::from_file(&config)?;
            let (points, path) = harness::run_error_surface(&cfg)?;
            eprintln!("wrote {} points to {}", points.len(), path.display());
        }
        Command::Aggregate { csv, by } => {
            let records = harness::read_records(std::fs::File::open(&csv)?)?;
            let (label, rows) = match by {
                GroupBy::Depth => ("depth", harness::aggregate_best_by_depth(&records)),
                GroupBy::Qubits => ("num_qubits", harness::aggregate_best_by_qubits(&records)),
            };
            println!("{label},best_mean_accuracy");
            for (k, acc) in rows {
                println!("{k},{acc}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
