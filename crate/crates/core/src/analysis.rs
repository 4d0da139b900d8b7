//! Observable post-processing shared by every engine: correlation series,
//! correlation-length extraction, the GGE reference value, and
//! method-vs-oracle deviation series.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// `C^zz_d(t)` on a time × distance grid, with optional standard errors for
/// sampled engines and a provenance tag naming the producer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationSeries {
    pub times: Vec<f64>,
    /// Row `i` holds `C^zz_d(times[i])` for `d = 0 ..= d_max`.
    pub values: Vec<Vec<f64>>,
    /// Standard errors with the same shape as `values`, when the engine is
    /// statistical.
    pub stderr: Option<Vec<Vec<f64>>>,
    pub provenance: String,
}

impl CorrelationSeries {
    pub fn new(
        times: Vec<f64>,
        values: Vec<Vec<f64>>,
        stderr: Option<Vec<Vec<f64>>>,
        provenance: String,
    ) -> Result<Self, CoreError> {
        if times.len() != values.len() {
            return Err(CoreError::InvalidParams("times and values lengths differ".into()));
        }
        let width = values.first().map_or(0, Vec::len);
        if width == 0 || values.iter().any(|row| row.len() != width) {
            return Err(CoreError::InvalidParams("ragged or empty correlation rows".into()));
        }
        if let Some(err) = &stderr {
            if err.len() != values.len() || err.iter().any(|row| row.len() != width) {
                return Err(CoreError::InvalidParams("stderr shape differs from values".into()));
            }
        }
        for (i, row) in values.iter().enumerate() {
            if (row[0] - 1.0).abs() > 1e-9 {
                return Err(CoreError::InvalidParams(format!(
                    "C^zz_0 must be 1, got {} at row {i}",
                    row[0]
                )));
            }
            for (d, &c) in row.iter().enumerate() {
                let slack = stderr
                    .as_ref()
                    .map_or(0.0, |e| 3.0 * e[i][d]);
                if c.abs() > 1.0 + slack + 1e-9 {
                    return Err(CoreError::InvalidParams(format!(
                        "|C^zz_{d}| = {} out of range at t = {}",
                        c.abs(),
                        times[i]
                    )));
                }
            }
        }
        Ok(Self { times, values, stderr, provenance })
    }

    /// Largest tabulated distance.
    pub fn d_max(&self) -> usize {
        self.values[0].len() - 1
    }

    pub fn value(&self, time_index: usize, d: usize) -> f64 {
        self.values[time_index][d]
    }

    /// Index of the grid time nearest-equal to `t` (within 1e-9), or an error.
    pub fn time_index(&self, t: f64) -> Result<usize, CoreError> {
        self.times
            .iter()
            .position(|&x| (x - t).abs() < 1e-9)
            .ok_or_else(|| CoreError::GridMismatch(format!("time {t} not on the grid")))
    }
}

/// One correlation-length fit: `ln|C_d| = -d/ξ` over `d ∈ {1, 2}` without an
/// intercept, so `1/ξ = -(ln|C_1| + 2 ln|C_2|)/5`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct XiFit {
    pub xi: f64,
    /// Fit residuals `ln|C_d| + d/ξ` at d = 1, 2.
    pub residuals: [f64; 2],
}

/// Correlations below this magnitude are treated as numerically zero and
/// yield no correlation length.
pub const XI_FLOOR: f64 = 1e-8;

/// Fit the correlation length from `C^zz_1` and `C^zz_2` of one row.
///
/// Absolute values are used, so quenches with negative nearest-neighbor
/// correlations (`h_{x,f} < 0`) fit the same way. Errors when either input is
/// below [`XI_FLOOR`] or when the fitted decay rate is not positive; in both
/// cases the correlation length is undefined and series builders record an
/// absent entry, never 0 or infinity.
pub fn fit_xi(series: &CorrelationSeries, t: f64) -> Result<XiFit, CoreError> {
    let row = series.time_index(t)?;
    fit_xi_row(&series.values[row])
}

pub(crate) fn fit_xi_row(row: &[f64]) -> Result<XiFit, CoreError> {
    if row.len() < 3 {
        return Err(CoreError::InvalidParams("fit needs distances up to d = 2".into()));
    }
    let c1 = row[1].abs();
    let c2 = row[2].abs();
    if c1 <= XI_FLOOR || c2 <= XI_FLOOR {
        return Err(CoreError::BelowFloor(XI_FLOOR));
    }
    let inv_xi = -(c1.ln() + 2.0 * c2.ln()) / 5.0;
    if inv_xi <= 0.0 {
        return Err(CoreError::NonDecaying);
    }
    let xi = 1.0 / inv_xi;
    Ok(XiFit {
        xi,
        residuals: [c1.ln() + inv_xi, c2.ln() + 2.0 * inv_xi],
    })
}

/// ξ(t) extracted per grid time; entries are absent where the fit is
/// undefined.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct XiSeries {
    pub times: Vec<f64>,
    pub xi: Vec<Option<XiFit>>,
    pub provenance: String,
}

impl XiSeries {
    pub fn from_correlations(series: &CorrelationSeries) -> Self {
        let xi = series
            .values
            .iter()
            .map(|row| fit_xi_row(row).ok())
            .collect();
        Self {
            times: series.times.clone(),
            xi,
            provenance: series.provenance.clone(),
        }
    }

    pub fn xi_at(&self, t: f64) -> Option<f64> {
        let idx = self.times.iter().position(|&x| (x - t).abs() < 1e-9)?;
        self.xi[idx].map(|f| f.xi)
    }
}

/// Stationary generalized-Gibbs-ensemble correlation length,
/// `ξ_GGE(ε) = 1 / ln(2(ε h_c + h_c))`, for relative distance
/// `ε = (h_{x,f} - h_c)/h_c` from the critical point.
pub fn gge_xi(eps: f64, h_c: f64) -> Result<f64, CoreError> {
    let arg = 2.0 * (eps * h_c + h_c);
    if arg <= 1.0 {
        return Err(CoreError::GgeDomain(arg));
    }
    Ok(1.0 / arg.ln())
}

/// Pointwise `Δξ(t) = |ξ_s - ξ_e|`; absent wherever either input is absent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeviationSeries {
    pub times: Vec<f64>,
    pub delta: Vec<Option<f64>>,
}

impl DeviationSeries {
    pub fn max(&self) -> Option<f64> {
        self.delta.iter().flatten().copied().fold(None, |acc, d| {
            Some(acc.map_or(d, |a: f64| a.max(d)))
        })
    }

    /// Max over grid times in `[t0, t1]` (inclusive), absent entries skipped.
    pub fn max_in_window(&self, t0: f64, t1: f64) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.delta)
            .filter(|(t, _)| **t >= t0 - 1e-12 && **t <= t1 + 1e-12)
            .filter_map(|(_, d)| *d)
            .fold(None, |acc, d| Some(acc.map_or(d, |a: f64| a.max(d))))
    }
}

pub fn deviation_series(sim: &XiSeries, exact: &XiSeries) -> Result<DeviationSeries, CoreError> {
    if sim.times.len() != exact.times.len()
        || sim
            .times
            .iter()
            .zip(&exact.times)
            .any(|(a, b)| (a - b).abs() > 1e-12)
    {
        return Err(CoreError::GridMismatch("deviation series needs identical grids".into()));
    }
    let delta = sim
        .xi
        .iter()
        .zip(&exact.xi)
        .map(|(a, b)| match (a, b) {
            (Some(x), Some(y)) => Some((x.xi - y.xi).abs()),
            _ => None,
        })
        .collect();
    Ok(DeviationSeries { times: sim.times.clone(), delta })
}

/// One point of a field scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanPoint {
    pub h_x_f: f64,
    pub xi: Option<f64>,
    /// Engine or fit failure recorded instead of aborting the scan.
    pub error: Option<String>,
}

/// Run `engine` for every final field in `grid` and fit ξ at time `t`.
/// Per-point failures are recorded and the scan continues.
pub fn xi_field_scan<F>(engine: F, grid: &[f64], t: f64) -> Vec<ScanPoint>
where
    F: Fn(f64) -> Result<CorrelationSeries, CoreError> + Sync,
{
    use rayon::prelude::*;
    grid.par_iter()
        .map(|&h| match engine(h) {
            Ok(series) => match fit_xi(&series, t) {
                Ok(fit) => ScanPoint { h_x_f: h, xi: Some(fit.xi), error: None },
                Err(e) => ScanPoint { h_x_f: h, xi: None, error: Some(e.to_string()) },
            },
            Err(e) => ScanPoint { h_x_f: h, xi: None, error: Some(e.to_string()) },
        })
        .collect()
}
