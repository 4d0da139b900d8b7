//! Result bundles on disk: a directory per experiment holding the config
//! echo, CSV observables, and engine diagnostics.
//!
//! All floating-point fields are written with the shortest round-trip decimal
//! representation, so reruns with the same seed produce byte-identical CSV
//! bodies; only `bundle.json` carries wall-clock metadata.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use quench_core::analysis::{CorrelationSeries, XiSeries};
use quench_core::variational::{SrIteration, TvmcSample};

use crate::config::ExperimentConfig;
use crate::engines::EngineRun;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Characters outside this set are replaced when an experiment id becomes a
/// path; forward slashes become nested directories.
pub fn bundle_dir(root: &Path, experiment_id: &str) -> PathBuf {
    let mut out = root.to_path_buf();
    for part in experiment_id.split('/') {
        let clean: String = part
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || "._+-=".contains(c) { c } else { '-' })
            .collect();
        out.push(if clean.is_empty() { "_".to_string() } else { clean });
    }
    out
}

fn csv_f64(x: f64) -> String {
    // `{}` on f64 is the shortest representation that round-trips exactly
    format!("{x}")
}

pub fn correlations_csv(series: &CorrelationSeries) -> String {
    let dmax = series.d_max();
    let mut out = String::from("time");
    for d in 0..=dmax {
        let _ = write!(out, ",czz_{d}");
    }
    if series.stderr.is_some() {
        for d in 0..=dmax {
            let _ = write!(out, ",stderr_{d}");
        }
    }
    out.push('\n');
    for (ti, t) in series.times.iter().enumerate() {
        let _ = write!(out, "{}", csv_f64(*t));
        for v in &series.values[ti] {
            let _ = write!(out, ",{}", csv_f64(*v));
        }
        if let Some(err) = &series.stderr {
            for v in &err[ti] {
                let _ = write!(out, ",{}", csv_f64(*v));
            }
        }
        out.push('\n');
    }
    out
}

pub fn xi_csv(xi: &XiSeries) -> String {
    let mut out = String::from("time,xi,residual_d1,residual_d2\n");
    for (t, fit) in xi.times.iter().zip(&xi.xi) {
        match fit {
            Some(f) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    csv_f64(*t),
                    csv_f64(f.xi),
                    csv_f64(f.residuals[0]),
                    csv_f64(f.residuals[1])
                );
            }
            None => {
                let _ = writeln!(out, "{},,,", csv_f64(*t));
            }
        }
    }
    out
}

pub fn sr_log_csv(log: &[SrIteration]) -> String {
    let mut out = String::from("iteration,energy_re,energy_im,variance,lambda\n");
    for l in log {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            l.iteration,
            csv_f64(l.energy_re),
            csv_f64(l.energy_im),
            csv_f64(l.variance),
            csv_f64(l.lambda)
        );
    }
    out
}

pub fn tvmc_csv(samples: &[TvmcSample]) -> String {
    let dmax = samples.first().map_or(0, |s| s.czz.len().saturating_sub(1));
    let mut out = String::from("time,energy_re,energy_im,variance,lambda");
    for d in 0..=dmax {
        let _ = write!(out, ",czz_{d}");
    }
    out.push('\n');
    for s in samples {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            csv_f64(s.time),
            csv_f64(s.energy_re),
            csv_f64(s.energy_im),
            csv_f64(s.variance),
            csv_f64(s.lambda)
        );
        for v in &s.czz {
            let _ = write!(out, ",{}", csv_f64(*v));
        }
        out.push('\n');
    }
    out
}

/// Write a completed run. Returns the bundle directory.
pub fn write_bundle(
    root: &Path,
    config: &ExperimentConfig,
    run: &EngineRun,
    wall_ms: u128,
) -> Result<PathBuf> {
    let dir = bundle_dir(root, &config.experiment_id);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("correlations.csv"), correlations_csv(&run.series))?;
    fs::write(dir.join("xi.csv"), xi_csv(&run.xi))?;
    if let Some(log) = &run.sr_log {
        fs::write(dir.join("sr_log.csv"), sr_log_csv(log))?;
    }
    if let Some(samples) = &run.tvmc {
        fs::write(dir.join("tvmc.csv"), tvmc_csv(samples))?;
    }
    if let Some((initial, final_state)) = &run.snapshots {
        initial.save(&dir.join("ground_state.snapshot.json"))?;
        final_state.save(&dir.join("final_state.snapshot.json"))?;
    }
    let meta = json!({
        "status": "ok",
        "tool_version": TOOL_VERSION,
        "config": serde_json::to_value(config)?,
        "diagnostics": Value::Object(run.diagnostics.clone()),
        "wall_ms": wall_ms,
    });
    fs::write(dir.join("bundle.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(dir)
}

/// Flush a failure marker so aborted runs remain inspectable.
pub fn write_failure(root: &Path, config: &ExperimentConfig, error: &str) -> Result<PathBuf> {
    let dir = bundle_dir(root, &config.experiment_id);
    fs::create_dir_all(&dir)?;
    let meta = json!({
        "status": "failed",
        "error": error,
        "tool_version": TOOL_VERSION,
        "config": serde_json::to_value(config)?,
    });
    fs::write(dir.join("bundle.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(dir)
}

/// A bundle read back for comparison.
pub struct LoadedBundle {
    pub config: ExperimentConfig,
    pub series: CorrelationSeries,
    pub xi: Vec<(f64, Option<f64>)>,
}

pub fn read_bundle(dir: &Path) -> Result<LoadedBundle> {
    let meta: Value = serde_json::from_str(
        &fs::read_to_string(dir.join("bundle.json"))
            .with_context(|| format!("reading {}/bundle.json", dir.display()))?,
    )?;
    if meta["status"] != "ok" {
        bail!("bundle {} has status {}", dir.display(), meta["status"]);
    }
    let config: ExperimentConfig = serde_json::from_value(meta["config"].clone())?;
    let series = parse_correlations_csv(&fs::read_to_string(dir.join("correlations.csv"))?)?;
    let xi = parse_xi_csv(&fs::read_to_string(dir.join("xi.csv"))?)?;
    Ok(LoadedBundle { config, series, xi })
}

pub fn parse_correlations_csv(body: &str) -> Result<CorrelationSeries> {
    let mut lines = body.lines();
    let header = lines.next().ok_or_else(|| anyhow!("empty correlations.csv"))?;
    let cols: Vec<&str> = header.split(',').collect();
    let n_czz = cols.iter().filter(|c| c.starts_with("czz_")).count();
    let has_err = cols.iter().any(|c| c.starts_with("stderr_"));
    if n_czz == 0 {
        bail!("correlations.csv has no czz columns");
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut stderr = if has_err { Some(Vec::new()) } else { None };
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        times.push(fields[0].parse::<f64>()?);
        let row: Vec<f64> = fields[1..=n_czz]
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()?;
        values.push(row);
        if let Some(errs) = stderr.as_mut() {
            let row: Vec<f64> = fields[n_czz + 1..=2 * n_czz]
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<_, _>>()?;
            errs.push(row);
        }
    }
    Ok(CorrelationSeries::new(times, values, stderr, "loaded".into())?)
}

pub fn parse_xi_csv(body: &str) -> Result<Vec<(f64, Option<f64>)>> {
    let mut out = Vec::new();
    for line in body.lines().skip(1) {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let t = fields[0].parse::<f64>()?;
        let xi = if fields.len() > 1 && !fields[1].is_empty() {
            Some(fields[1].parse::<f64>()?)
        } else {
            None
        };
        out.push((t, xi));
    }
    Ok(out)
}
