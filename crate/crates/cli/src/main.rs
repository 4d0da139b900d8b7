use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use quench_cli::bundle::{write_bundle, write_failure};
use quench_cli::compare::compare_bundles;
use quench_cli::config::ExperimentConfig;
use quench_cli::engines::run_experiment;
use quench_cli::recipes;

/// Batch experiment runner for the spin-chain quench toolkit.
#[derive(Parser)]
#[command(name = "quench", version, about)]
struct Cli {
    /// Worker threads for the internal thread pool (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and persist its result bundle.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output root; falls back to the config's out_dir, then
        /// $QUENCH_OUT_ROOT, then ./runs.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and validate a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare two result bundles and emit a deviation report.
    Compare {
        bundle_a: PathBuf,
        bundle_b: PathBuf,
        /// Pass threshold on the maximum |ΔC^zz| over all distances and times.
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        /// Directory for deviation.csv and summary.json (defaults to stdout only).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expand a named experiment recipe into config files.
    Recipe {
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn out_root(flag: Option<PathBuf>, config: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| config.out_dir.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os("QUENCH_OUT_ROOT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"))
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let body = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ExperimentConfig::from_json(&body).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("thread pool setup")?;
    }
    match cli.command {
        Command::Run { config, out, seed } => {
            let mut cfg = load_config(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let root = out_root(out, &cfg);
            let start = Instant::now();
            match run_experiment(&cfg) {
                Ok(run) => {
                    let dir = write_bundle(&root, &cfg, &run, start.elapsed().as_millis())?;
                    println!("ok {} ({} times, d <= {})", dir.display(), run.series.times.len(), run.series.d_max());
                    Ok(ExitCode::SUCCESS)
                }
                Err(err) => {
                    let dir = write_failure(&root, &cfg, &format!("{err:#}"))?;
                    eprintln!("engine failed: {err:#}\nfailure marker written to {}", dir.display());
                    Ok(ExitCode::from(2))
                }
            }
        }
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            println!("ok {} (engine {}, n = {})", cfg.experiment_id, cfg.engine, cfg.model.n);
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare { bundle_a, bundle_b, tolerance, out } => {
            let report = compare_bundles(&bundle_a, &bundle_b, tolerance)?;
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("deviation.csv"), &report.deviation_csv)?;
                std::fs::write(dir.join("summary.json"), &report.summary_json)?;
            }
            print!("{}", report.summary_json);
            Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Recipe { name, out } => {
            let configs = recipes::recipe(&name).map_err(anyhow::Error::msg)?;
            std::fs::create_dir_all(&out)?;
            let mut manifest = Vec::new();
            for cfg in &configs {
                let file = format!("{}.json", cfg.experiment_id.replace('/', "__"));
                std::fs::write(out.join(&file), cfg.to_json())?;
                manifest.push(file);
            }
            std::fs::write(
                out.join("manifest.json"),
                serde_json::to_string_pretty(&manifest)? + "\n",
            )?;
            println!("wrote {} configs to {}", configs.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
