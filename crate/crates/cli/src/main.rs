use std::path::PathBuf;
use std::process::exit;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use qgat_cli::run::{run_reproduce, run_train, run_validate, ReproduceOptions};

/// Quantum graph attention networks on molecular graphs.
///
/// Exit codes: 0 ok, 1 user error (bad flags, config, or input data),
/// 2 runtime error (training divergence, IO failure mid-run).
#[derive(Parser)]
#[command(name = "qgat", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a JSONL dataset and print record count, size histogram, and
    /// feature ranges.
    ValidateData {
        /// Path to the JSONL dataset.
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Train one model from a TOML experiment config and write report.csv,
    /// summary.json, and checkpoint.json into its output directory.
    Train {
        /// Path to the TOML experiment config.
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the full model grid — {gnn, gat, qgnn, qgat} × {single, multi} ×
    /// size buckets — and emit a combined grid.csv plus per-run plot data.
    ///
    /// Defaults are desk scale: 10 molecules per cell and 150 epochs. The
    /// published scale is --samples-single 30 --samples-multi 40. Grid cells
    /// run in parallel; QGAT_THREADS caps the worker count.
    Reproduce {
        /// Path to the JSONL dataset.
        #[arg(long)]
        dataset: PathBuf,
        /// Output directory for grid.csv and runs/*.csv.
        #[arg(long)]
        out: PathBuf,
        /// Molecules sampled per bucket for single-model cells.
        #[arg(long, default_value_t = 10)]
        samples_single: usize,
        /// Molecules sampled per bucket for multi-model cells.
        #[arg(long, default_value_t = 10)]
        samples_multi: usize,
        /// Training epochs per cell.
        #[arg(long, default_value_t = 150)]
        epochs: usize,
        /// Sampling and initialization seed.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Molecule-size buckets (max atoms), comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [9usize, 16, 20, 25])]
        buckets: Vec<usize>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            exit(0);
        }
        Err(e) => {
            eprint!("{e}");
            exit(1);
        }
    };
    let result = match cli.command {
        Command::ValidateData { dataset } => run_validate(&dataset),
        Command::Train { config } => run_train(&config),
        Command::Reproduce {
            dataset,
            out,
            samples_single,
            samples_multi,
            epochs,
            seed,
            buckets,
        } => run_reproduce(&ReproduceOptions {
            dataset,
            out,
            samples_single,
            samples_multi,
            epochs,
            seed,
            buckets,
        }),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        exit(e.exit_code());
    }
}
