//! Named experiment recipes: expand one name into the full set of configs
//! for a figure-style comparison, with desk-scale substitutions recorded in
//! each config's notes.

use crate::config::{
    DtwaBlock, EngineKind, ExperimentConfig, FieldPair, ModelBlock, QuenchBlock,
    RbmBlock,
};

pub const RECIPE_NAMES: [&str; 6] = [
    "fig2a-scan",
    "fig2c-hx1",
    "fig2c-hx2",
    "fig3-hz2-grid",
    "figS2-gge",
    "figS4-alpha-scan",
];

/// SR step for ground states in the deep paramagnetic regime; the natural
/// gradient is an imaginary-time step, so it must stay below the inverse
/// bandwidth ~ 1/(4 h_x).
fn gamma_for(h_x_initial: f64) -> f64 {
    if h_x_initial.abs() >= 10.0 {
        1e-3
    } else {
        0.05
    }
}

struct Builder {
    recipe: String,
    configs: Vec<ExperimentConfig>,
}

impl Builder {
    fn new(recipe: &str) -> Self {
        Self { recipe: recipe.to_string(), configs: Vec::new() }
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        label: String,
        engine: EngineKind,
        n: usize,
        quench: QuenchBlock,
        rbm: Option<RbmBlock>,
        dtwa: Option<DtwaBlock>,
        notes: Vec<String>,
    ) {
        let seed = 1000 + self.configs.len() as u64;
        self.configs.push(ExperimentConfig {
            experiment_id: format!("{}/{}", self.recipe, label),
            engine,
            model: ModelBlock { n, j: 1.0 },
            quench,
            rbm,
            dtwa,
            seed,
            out_dir: None,
            notes,
        });
    }
}

fn quench_to(h_x_f: f64, h_z_f: f64, t_max: f64, steps: usize) -> QuenchBlock {
    QuenchBlock {
        initial: FieldPair { h_x: 100.0, h_z: 0.0 },
        final_fields: FieldPair { h_x: h_x_f, h_z: h_z_f },
        t_max,
        steps,
    }
}

fn rbm_block(alpha: usize) -> RbmBlock {
    RbmBlock { gamma: gamma_for(100.0), ..RbmBlock::defaults(alpha) }
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step).round() as usize;
    (0..=count).map(|k| lo + k as f64 * step).collect()
}

fn field_label(h: f64) -> String {
    format!("hx{h:+.2}")
}

/// Expand a named recipe into its config set.
pub fn recipe(name: &str) -> Result<Vec<ExperimentConfig>, String> {
    let mut b = Builder::new(name);
    match name {
        // correlation length at t = 1 vs final transverse field, N = 10
        "fig2a-scan" => {
            for h in grid(-2.0, 2.0, 0.25) {
                let q = quench_to(h, 0.0, 1.0, 20);
                b.push(format!("exact/{}", field_label(h)), EngineKind::Exact, 10, q, None, None, vec![]);
                for alpha in [1usize, 2, 4, 8] {
                    b.push(
                        format!("rbm-a{alpha}/{}", field_label(h)),
                        EngineKind::Rbm,
                        10,
                        q,
                        Some(rbm_block(alpha)),
                        None,
                        vec![],
                    );
                }
                b.push(
                    format!("dtwa/{}", field_label(h)),
                    EngineKind::Dtwa,
                    10,
                    q,
                    None,
                    Some(DtwaBlock { trajectories: 10_000, dt: 0.01 }),
                    vec![],
                );
            }
        }
        // C^zz_d(t) after the quench to criticality, N = 10
        "fig2c-hx1" => {
            let q = quench_to(1.0, 0.0, 3.0, 60);
            b.push("exact".into(), EngineKind::Exact, 10, q, None, None, vec![]);
            for alpha in [1usize, 2, 4, 8] {
                b.push(
                    format!("rbm-a{alpha}"),
                    EngineKind::Rbm,
                    10,
                    q,
                    Some(rbm_block(alpha)),
                    None,
                    vec![],
                );
            }
        }
        // quench to h_x = 2 at the largest oracle-checkable size
        "fig2c-hx2" => {
            let q = quench_to(2.0, 0.0, 3.0, 60);
            let note = "N = 12 substituted for the reference N = 42 so the exact oracle applies".to_string();
            b.push("exact".into(), EngineKind::Exact, 12, q, None, None, vec![note.clone()]);
            b.push(
                "rbm-a1".into(),
                EngineKind::Rbm,
                12,
                q,
                Some(rbm_block(1)),
                None,
                vec![note.clone()],
            );
            b.push(
                "dtwa".into(),
                EngineKind::Dtwa,
                12,
                q,
                None,
                Some(DtwaBlock { trajectories: 10_000, dt: 0.01 }),
                vec![note],
            );
        }
        // non-integrable quenches to h_z = 2 over a transverse-field grid
        "fig3-hz2-grid" => {
            for h in grid(-4.0, 4.0, 0.25) {
                let q = quench_to(h, 2.0, 3.0, 60);
                b.push(format!("exact/{}", field_label(h)), EngineKind::Exact, 10, q, None, None, vec![]);
                for alpha in [1usize, 10] {
                    b.push(
                        format!("rbm-a{alpha}/{}", field_label(h)),
                        EngineKind::Rbm,
                        10,
                        q,
                        Some(rbm_block(alpha)),
                        None,
                        vec![],
                    );
                }
                b.push(
                    format!("dtwa/{}", field_label(h)),
                    EngineKind::Dtwa,
                    10,
                    q,
                    None,
                    Some(DtwaBlock { trajectories: 10_000, dt: 0.01 }),
                    vec![],
                );
            }
        }
        // stationary correlation length vs distance from the critical point
        "figS2-gge" => {
            for eps in [0.03, 0.1, 0.3, 1.0, 3.0] {
                let h = 1.0 + eps;
                let q = quench_to(h, 0.0, 1.0, 20);
                let label = format!("eps{eps}");
                b.push(format!("exact/{label}"), EngineKind::Exact, 10, q, None, None, vec![]);
                for alpha in [1usize, 8] {
                    b.push(
                        format!("rbm-a{alpha}/{label}"),
                        EngineKind::Rbm,
                        10,
                        q,
                        Some(rbm_block(alpha)),
                        None,
                        vec![],
                    );
                }
                b.push(
                    format!("dtwa/{label}"),
                    EngineKind::Dtwa,
                    10,
                    q,
                    None,
                    Some(DtwaBlock { trajectories: 10_000, dt: 0.01 }),
                    vec![],
                );
            }
        }
        // hidden-unit-density scaling at N = 12
        "figS4-alpha-scan" => {
            let q = quench_to(1.0, 0.0, 3.0, 60);
            let note = "N = 12 panel only; the N = 42 companion panel is exercised as a sampled-backend smoke test".to_string();
            b.push("exact".into(), EngineKind::Exact, 12, q, None, None, vec![note.clone()]);
            for alpha in [1usize, 4, 8, 15] {
                b.push(
                    format!("rbm-a{alpha}"),
                    EngineKind::Rbm,
                    12,
                    q,
                    Some(rbm_block(alpha)),
                    None,
                    vec![note.clone()],
                );
            }
        }
        other => {
            return Err(format!(
                "unknown recipe '{other}'; available: {}",
                RECIPE_NAMES.join(", ")
            ));
        }
    }
    for cfg in &b.configs {
        cfg.validate().map_err(|e| format!("recipe produced invalid config {}: {e}", cfg.experiment_id))?;
    }
    Ok(b.configs)
}
