//! Bundle comparison: per-distance correlation deviations plus Δξ(t), with a
//! machine-readable pass/fail against a caller-supplied tolerance.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Result};
use serde_json::json;

use crate::bundle::{read_bundle, LoadedBundle};

pub struct DistanceStat {
    pub d: usize,
    pub max_abs: f64,
    pub mean_abs: f64,
}

pub struct CompareReport {
    pub pass: bool,
    pub tolerance: f64,
    pub per_distance: Vec<DistanceStat>,
    /// Max |ΔC| over all distances and times.
    pub max_abs: f64,
    /// Max Δξ over times where both bundles have a fit.
    pub dxi_max: Option<f64>,
    pub deviation_csv: String,
    pub summary_json: String,
}

pub fn compare_bundles(dir_a: &Path, dir_b: &Path, tolerance: f64) -> Result<CompareReport> {
    let a = read_bundle(dir_a)?;
    let b = read_bundle(dir_b)?;
    compare_loaded(&a, &b, tolerance)
}

pub fn compare_loaded(a: &LoadedBundle, b: &LoadedBundle, tolerance: f64) -> Result<CompareReport> {
    if a.config.model.n != b.config.model.n {
        bail!(
            "bundle mismatch: model.n differs ({} vs {})",
            a.config.model.n,
            b.config.model.n
        );
    }
    if a.series.times.len() != b.series.times.len()
        || a.series
            .times
            .iter()
            .zip(&b.series.times)
            .any(|(x, y)| (x - y).abs() > 1e-12)
    {
        bail!("bundle mismatch: time grids differ");
    }
    let dmax = a.series.d_max().min(b.series.d_max());

    let nt = a.series.times.len();
    let mut per_distance = Vec::with_capacity(dmax + 1);
    let mut max_abs = 0.0f64;
    for d in 0..=dmax {
        let mut worst = 0.0f64;
        let mut total = 0.0f64;
        for ti in 0..nt {
            let dev = (a.series.values[ti][d] - b.series.values[ti][d]).abs();
            worst = worst.max(dev);
            total += dev;
        }
        max_abs = max_abs.max(worst);
        per_distance.push(DistanceStat { d, max_abs: worst, mean_abs: total / nt as f64 });
    }

    let mut dxi_max: Option<f64> = None;
    let mut dxi_rows: Vec<Option<f64>> = Vec::with_capacity(nt);
    for ((_, xa), (_, xb)) in a.xi.iter().zip(&b.xi) {
        let dxi = match (xa, xb) {
            (Some(x), Some(y)) => Some((x - y).abs()),
            _ => None,
        };
        if let Some(v) = dxi {
            dxi_max = Some(dxi_max.map_or(v, |m| m.max(v)));
        }
        dxi_rows.push(dxi);
    }

    let mut csv = String::from("time");
    for d in 0..=dmax {
        let _ = write!(csv, ",dczz_{d}");
    }
    csv.push_str(",dxi\n");
    for ti in 0..nt {
        let _ = write!(csv, "{}", a.series.times[ti]);
        for d in 0..=dmax {
            let _ = write!(csv, ",{}", (a.series.values[ti][d] - b.series.values[ti][d]).abs());
        }
        match dxi_rows[ti] {
            Some(v) => {
                let _ = writeln!(csv, ",{v}");
            }
            None => csv.push_str(",\n"),
        }
    }

    let pass = max_abs <= tolerance;
    let summary = json!({
        "pass": pass,
        "tolerance": tolerance,
        "max_abs_czz_deviation": max_abs,
        "max_dxi": dxi_max,
        "per_distance": per_distance
            .iter()
            .map(|s| json!({"d": s.d, "max_abs": s.max_abs, "mean_abs": s.mean_abs}))
            .collect::<Vec<_>>(),
    });

    Ok(CompareReport {
        pass,
        tolerance,
        per_distance,
        max_abs,
        dxi_max,
        deviation_csv: csv,
        summary_json: serde_json::to_string_pretty(&summary)? + "\n",
    })
}
