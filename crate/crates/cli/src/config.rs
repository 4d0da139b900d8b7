//! Experiment configuration: JSON schema, validation, and the mapping onto
//! the core parameter types.

use serde::{Deserialize, Serialize};

use quench_core::rbm::MetropolisConfig;
use quench_core::variational::{EstimatorBackend, RegularizationSchedule};
use quench_core::{CoreError, IsingParams, QuenchProtocol};

pub const DENSE_LIMIT: usize = quench_core::exact::DENSE_LIMIT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Exact,
    Fermion,
    Rbm,
    Dtwa,
}

impl std::fmt::Display for EngineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            EngineKind::Exact => "exact",
            EngineKind::Fermion => "fermion",
            EngineKind::Rbm => "rbm",
            EngineKind::Dtwa => "dtwa",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelBlock {
    pub n: usize,
    #[serde(default = "default_coupling")]
    pub j: f64,
}

fn default_coupling() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldPair {
    pub h_x: f64,
    pub h_z: f64,
}

/// Quench protocol block: the observation grid is `steps + 1` uniform points
/// on `[0, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuenchBlock {
    pub initial: FieldPair,
    #[serde(rename = "final")]
    pub final_fields: FieldPair,
    pub t_max: f64,
    pub steps: usize,
}

/// Metropolis block of a sampled backend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerBlock {
    pub n_samples: usize,
    #[serde(default)]
    pub burn_in: Option<usize>,
    #[serde(default)]
    pub thinning: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendBlock {
    Exact,
    Sampled(SamplerBlock),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbmBlock {
    pub alpha: usize,
    pub symmetric: bool,
    /// SR step size.
    pub gamma: f64,
    pub schedule: RegularizationSchedule,
    pub sr_max_iters: usize,
    /// tVMC integrator step.
    pub dt: f64,
    pub diag_shift: f64,
    pub svd_cutoff: f64,
    pub backend: BackendBlock,
}

impl RbmBlock {
    /// Spec defaults; `gamma` must still be scaled to the field strength by
    /// the caller (recipes use 1e-3 at h_x = 100).
    pub fn defaults(alpha: usize) -> Self {
        Self {
            alpha,
            symmetric: true,
            gamma: 0.05,
            schedule: RegularizationSchedule::default(),
            sr_max_iters: 4000,
            dt: 1e-3,
            diag_shift: 1e-4,
            svd_cutoff: 1e-8,
            backend: BackendBlock::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DtwaBlock {
    pub trajectories: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub engine: EngineKind,
    pub model: ModelBlock,
    pub quench: QuenchBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rbm: Option<RbmBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dtwa: Option<DtwaBlock>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    /// Free-form provenance notes (e.g. desk-scale substitutions) echoed into
    /// the result bundle.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ExperimentConfig {
    pub fn initial_params(&self) -> IsingParams {
        IsingParams {
            j: self.model.j,
            h_x: self.quench.initial.h_x,
            h_z: self.quench.initial.h_z,
            n: self.model.n,
        }
    }

    pub fn final_params(&self) -> IsingParams {
        IsingParams {
            j: self.model.j,
            h_x: self.quench.final_fields.h_x,
            h_z: self.quench.final_fields.h_z,
            n: self.model.n,
        }
    }

    pub fn protocol(&self) -> Result<QuenchProtocol, CoreError> {
        QuenchProtocol::uniform(
            self.initial_params(),
            self.final_params(),
            self.quench.t_max,
            self.quench.steps,
        )
    }

    pub fn metropolis(&self, sampler: &SamplerBlock) -> MetropolisConfig {
        MetropolisConfig {
            n_samples: sampler.n_samples,
            burn_in: sampler.burn_in,
            thinning: sampler.thinning,
            seed: self.seed,
        }
    }

    pub fn backend(&self) -> Option<EstimatorBackend> {
        self.rbm.as_ref().map(|r| match &r.backend {
            BackendBlock::Exact => EstimatorBackend::Exact,
            BackendBlock::Sampled(s) => EstimatorBackend::Sampled(self.metropolis(s)),
        })
    }

    /// Field-by-field validation; error messages name the offending field.
    pub fn validate(&self) -> Result<(), String> {
        if self.experiment_id.is_empty() {
            return Err("experiment_id: must not be empty".into());
        }
        if self.model.n < 2 {
            return Err(format!("model.n: need at least 2 sites, got {}", self.model.n));
        }
        if !self.model.j.is_finite() {
            return Err("model.j: must be finite".into());
        }
        if self.quench.t_max <= 0.0 || self.quench.steps == 0 {
            return Err("quench.t_max/steps: horizon must be positive with at least one step".into());
        }
        for (name, f) in [("quench.initial", &self.quench.initial), ("quench.final", &self.quench.final_fields)] {
            if !(f.h_x.is_finite() && f.h_z.is_finite()) {
                return Err(format!("{name}: fields must be finite"));
            }
        }
        match self.engine {
            EngineKind::Exact => {
                if self.model.n > DENSE_LIMIT {
                    return Err(format!(
                        "model.n: exact engine is limited to n <= {DENSE_LIMIT}, got {}",
                        self.model.n
                    ));
                }
            }
            EngineKind::Fermion => {
                if self.quench.initial.h_z != 0.0 || self.quench.final_fields.h_z != 0.0 {
                    return Err("quench.final.h_z: fermion engine requires h_z = 0 on both sides".into());
                }
                if self.model.n % 2 != 0 {
                    return Err("model.n: fermion engine requires even n".into());
                }
            }
            EngineKind::Rbm | EngineKind::Dtwa => {}
        }
        // exactly one engine block matches the selected engine
        match (self.engine, &self.rbm, &self.dtwa) {
            (EngineKind::Rbm, Some(r), None) => {
                if r.alpha < 1 {
                    return Err("rbm.alpha: must be at least 1".into());
                }
                if r.gamma <= 0.0 {
                    return Err("rbm.gamma: must be positive".into());
                }
                if r.dt <= 0.0 {
                    return Err("rbm.dt: must be positive".into());
                }
                if matches!(r.backend, BackendBlock::Exact) && self.model.n > DENSE_LIMIT {
                    return Err(format!(
                        "rbm.backend: the exact backend is limited to n <= {DENSE_LIMIT}"
                    ));
                }
                if let BackendBlock::Sampled(s) = &r.backend {
                    if s.n_samples == 0 {
                        return Err("rbm.backend.sampled.n_samples: must be positive".into());
                    }
                }
            }
            (EngineKind::Dtwa, None, Some(d)) => {
                if d.trajectories == 0 {
                    return Err("dtwa.trajectories: must be positive".into());
                }
                if d.dt <= 0.0 {
                    return Err("dtwa.dt: must be positive".into());
                }
            }
            (EngineKind::Exact | EngineKind::Fermion, None, None) => {}
            (engine, rbm, dtwa) => {
                return Err(format!(
                    "engine blocks: engine '{engine}' requires exactly its own block (rbm present: {}, dtwa present: {})",
                    rbm.is_some(),
                    dtwa.is_some()
                ));
            }
        }
        Ok(())
    }

    pub fn from_json(body: &str) -> Result<Self, String> {
        let cfg: Self = serde_json::from_str(body).map_err(|e| format!("config parse error: {e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail") + "\n"
    }
}
