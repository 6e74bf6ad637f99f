use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mmv_harness::{commands, ExperimentConfig, HarnessError, NetKind};

#[derive(Parser, Debug)]
#[command(
    name = "mmvnet",
    version,
    about = "Datasets, offline training and NMSE sweeps for MMV channel estimation"
)]
struct Cli {
    /// TOML configuration file (defaults apply when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate training sets for the configured networks and pilot lengths.
    GenData {
        /// Also write a CSV copy of each dataset for inspection.
        #[arg(long)]
        csv: bool,
    },
    /// Train one network on a dataset file.
    Train {
        #[arg(long, value_enum)]
        kind: NetKind,
        #[arg(long)]
        dataset: PathBuf,
        /// Weight file to write (default: <weights_dir>/<kind>_T<T>.bin).
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Run the configured sweep and write results.csv and summary.csv.
    Run,
    /// Print the layout and statistics of a weight file.
    InspectWeights { path: PathBuf },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<(), HarnessError> {
    if let Command::InspectWeights { path } = &cli.command {
        print!("{}", commands::inspect_weights(path)?);
        return Ok(());
    }
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::GenData { csv } => {
            let report = commands::gen_data(&cfg, *csv)?;
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            for s in &report.skipped {
                eprintln!("skipped {s}");
            }
        }
        Command::Train {
            kind,
            dataset,
            weights,
        } => {
            let report = commands::train(&cfg, *kind, dataset, weights.as_deref())?;
            let first = report.curve.first().copied().unwrap_or(f64::NAN);
            let last = report.curve.last().copied().unwrap_or(f64::NAN);
            println!(
                "trained {} epochs: loss {first:.6} -> {last:.6}",
                report.curve.len()
            );
            println!("wrote {}", report.weights.display());
            println!("wrote {}", report.loss_csv.display());
        }
        Command::Run => {
            let report = commands::run(&cfg)?;
            println!(
                "{:<10} {:>10} {:>7} {:>8} {:>12}",
                "solver",
                cfg.sweep.axis.name(),
                "trials",
                "failed",
                "median_nmse"
            );
            for s in &report.summary {
                let med = s
                    .median_nmse
                    .map_or_else(|| "-".to_string(), |v| format!("{v:.4e}"));
                println!(
                    "{:<10} {:>10} {:>7} {:>8} {:>12}",
                    s.solver, s.sweep_value, s.trials, s.failures, med
                );
            }
            println!("wrote {}", report.results_csv.display());
            println!("wrote {}", report.summary_csv.display());
        }
        Command::InspectWeights { .. } => unreachable!("handled above"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
