use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use simbo::bo::build_behavior_map;
use simbo::control::CostId;
use simbo::exp::{
    build_report, file_fingerprint, fingerprint, load_runs, run_campaign, workers_from_env, write_report, Config,
};
use simbo::features::{collect_dataset, Dataset};
use simbo::nn::train;
use simbo::sim::Fidelity;
use simbo::{Error, Result};

#[derive(Parser)]
#[command(name = "simbo", version, about = "Simulation-informed Bayesian optimization of biped walking controllers")]
struct Cli {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Roll out a Sobol grid of controllers and write the dataset.
    Collect {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        fidelity: Option<Fidelity>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Train the trajectory-summary network on a dataset.
    TrainNn {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Build a duty-factor behavior map from a dataset.
    ItneMap {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "hardware")]
        cost: CostId,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run the configured campaign, skipping runs already on disk.
    Bo {
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Aggregate run files into best-so-far curves.
    Report {
        #[arg(long)]
        runs: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Serialize)]
struct DatasetManifest {
    spec_fingerprint: String,
    file_fingerprint: String,
    rows: usize,
    walking_fraction: f64,
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => std::fs::create_dir_all(p).map_err(|e| Error::io(p, e)),
        _ => Ok(()),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    create_parent(path)?;
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::parse("json", e))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn run(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::parse("")?,
    };
    let workers = workers_from_env();
    match cli.command {
        Command::Collect { n, fidelity, output } => {
            if let Some(n) = n {
                config.collect.n = n;
            }
            if let Some(f) = fidelity {
                config.collect.fidelity = f;
            }
            let output = output.unwrap_or_else(|| config.collect.output.clone());
            let spec = config.collect_spec()?;
            let ds = collect_dataset(&spec, workers)?;
            create_parent(&output)?;
            ds.save(&output)?;
            let manifest = DatasetManifest {
                spec_fingerprint: fingerprint(&spec)?,
                file_fingerprint: file_fingerprint(&output)?,
                rows: ds.len(),
                walking_fraction: ds.walking_fraction(),
            };
            write_json(&output.with_extension("manifest.json"), &manifest)?;
            println!(
                "{}: {} rows at {}, {:.1}% walking",
                output.display(),
                ds.len(),
                spec.fidelity,
                100.0 * manifest.walking_fraction
            );
        }
        Command::TrainNn { dataset, output, epochs } => {
            if let Some(e) = epochs {
                config.train.epochs = e;
            }
            let ds = Dataset::load(&dataset)?;
            let fp = file_fingerprint(&dataset)?;
            let points: Vec<Vec<f64>> = ds.rows.iter().map(|r| r.point.clone()).collect();
            let targets: Vec<Vec<f64>> = ds.rows.iter().map(|r| r.summary.clone()).collect();
            let indices: Vec<usize> = ds.rows.iter().map(|r| r.index).collect();
            let report = train(&points, &targets, &indices, &config.train, &fp)?;
            create_parent(&output)?;
            report.weights.save(&output)?;
            println!(
                "{}: train loss {:.4} -> {:.4}, validation {:.4}, {} restarts",
                output.display(),
                report.train_loss.first().copied().unwrap_or(f64::NAN),
                report.train_loss.last().copied().unwrap_or(f64::NAN),
                report.weights.meta.validation_loss,
                report.restarts
            );
        }
        Command::ItneMap { dataset, cost, output } => {
            let ds = Dataset::load(&dataset)?;
            let map = build_behavior_map(&ds, cost, &file_fingerprint(&dataset)?)?;
            write_json(&output, &map)?;
            println!("{}: {} occupied cells", output.display(), map.occupancy());
        }
        Command::Bo { output } => {
            if let Some(o) = output {
                config.campaign.output = o;
            }
            let files = run_campaign(&config, workers)?;
            println!("{} run files in {}", files.len(), config.campaign.output.display());
        }
        Command::Report { runs, output } => {
            let report = build_report(&load_runs(&runs)?)?;
            write_report(&report, &output)?;
            for m in &report.methods {
                println!(
                    "{:<16} runs {:>3}  median best {:>9.4}  walking {:>5.1}%  median first walk {}",
                    m.method.name(),
                    m.runs,
                    m.median_final_best(),
                    100.0 * m.final_walking_fraction(),
                    m.median_first_walk()
                );
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
            ExitCode::FAILURE
        }
    }
}
