//! Engine dispatch: one experiment config in, observables out.

use anyhow::{anyhow, Context, Result};
use serde_json::{json, Map, Value};

use quench_core::analysis::{CorrelationSeries, XiSeries};
use quench_core::dtwa::{run_dtwa, TrajectoryEnsembleConfig};
use quench_core::sector::{SectorSpectral, TranslationSector};
use quench_core::rbm::Snapshot;
use quench_core::variational::{
    evolve_tvmc, ground_state_solve, SrConfig, SrIteration, TvmcConfig, TvmcSample,
};
use quench_core::{fermion, sector};

use crate::config::{EngineKind, ExperimentConfig};

/// Uniform engine output: the correlation series, the fitted correlation
/// lengths, optional variational logs, and engine diagnostics for the bundle.
pub struct EngineRun {
    pub series: CorrelationSeries,
    pub xi: XiSeries,
    pub sr_log: Option<Vec<SrIteration>>,
    pub tvmc: Option<Vec<TvmcSample>>,
    /// Converged pre-quench and final variational parameters (rbm engine).
    pub snapshots: Option<(Snapshot, Snapshot)>,
    pub diagnostics: Map<String, Value>,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<EngineRun> {
    config.validate().map_err(|e| anyhow!("invalid config: {e}"))?;
    let protocol = config.protocol()?;
    let mut diagnostics = Map::new();

    let series = match config.engine {
        EngineKind::Exact => {
            let sector = TranslationSector::new(config.model.n)?;
            let spec_i = SectorSpectral::new(&sector, &config.initial_params())?;
            diagnostics.insert("ground_energy_initial".into(), json!(spec_i.ground_energy()));
            sector::quench_series(&protocol).context("exact engine")?
        }
        EngineKind::Fermion => fermion::quench_series(&protocol).context("fermion engine")?,
        EngineKind::Dtwa => {
            let block = config.dtwa.as_ref().expect("validated");
            let ens = TrajectoryEnsembleConfig {
                trajectories: block.trajectories,
                dt: block.dt,
                seed: config.seed,
            };
            let run = run_dtwa(&protocol, &ens).context("dtwa engine")?;
            diagnostics.insert("max_norm_drift".into(), json!(run.max_norm_drift));
            diagnostics.insert("max_energy_drift".into(), json!(run.max_energy_drift));
            run.series
        }
        EngineKind::Rbm => {
            let block = config.rbm.as_ref().expect("validated");
            let backend = config.backend().expect("validated");
            let sr = SrConfig {
                gamma: block.gamma,
                schedule: block.schedule,
                max_iters: block.sr_max_iters,
                seed: config.seed,
                init_sigma: 0.01,
                backend: backend.clone(),
            };
            let solve = ground_state_solve(&config.initial_params(), block.alpha, block.symmetric, &sr)
                .context("SR ground-state search")?;
            diagnostics.insert("sr_iterations".into(), json!(solve.iterations));
            diagnostics.insert("sr_final_energy".into(), json!(solve.final_energy().re));
            let tvmc = TvmcConfig {
                dt: block.dt,
                integrator_order: 4,
                diag_shift: block.diag_shift,
                svd_cutoff: block.svd_cutoff,
                backend,
            };
            let initial_snapshot = Snapshot::from_ansatz(&solve.ansatz);
            let run = evolve_tvmc(&solve.ansatz, &protocol, &tvmc).context("tVMC evolution")?;
            let drift = run
                .samples
                .iter()
                .map(|s| (s.energy_re - run.samples[0].energy_re).abs())
                .fold(0.0, f64::max)
                / config.model.n as f64;
            diagnostics.insert("energy_drift_per_site".into(), json!(drift));
            let sr_log = solve.log;
            let samples = run.samples;
            let series = run.series;
            let snapshots = Some((initial_snapshot, Snapshot::from_ansatz(&run.final_ansatz)));
            return Ok(EngineRun {
                xi: XiSeries::from_correlations(&series),
                series,
                sr_log: Some(sr_log),
                tvmc: Some(samples),
                snapshots,
                diagnostics,
            });
        }
    };

    Ok(EngineRun {
        xi: XiSeries::from_correlations(&series),
        series,
        sr_log: None,
        tvmc: None,
        snapshots: None,
        diagnostics,
    })
}
