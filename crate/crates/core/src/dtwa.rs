//! Discrete truncated Wigner approximation: sample discrete phase-space
//! points of the x-polarized initial state, evolve each sample with the
//! classical Poisson-bracket equations of motion, and average observables
//! over trajectories.
//!
//! The single-spin phase space has four points `(a_1, a_2)` with operators
//!
//! ```text
//! A_α = ½ [ (-1)^{a_1} σ^x + (-1)^{a_1+a_2} σ^y + (-1)^{a_2} σ^z + 1 ]
//! ```
//!
//! and quasi-probabilities `W_α = ½ Tr(ρ A_α)`. Two such spaces with
//! complementary operator choices cover all eight discrete orientations.
//! Sampling requires every weight to be non-negative, which holds for the
//! fully x-polarized state used here.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::CorrelationSeries;
use crate::error::CoreError;
use crate::spin::{IsingParams, QuenchProtocol};

/// One point of the discrete phase space and its operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhasePointOperator {
    pub a1: u8,
    pub a2: u8,
    /// Which of the two complementary phase spaces the point belongs to.
    pub second_space: bool,
}

impl PhasePointOperator {
    pub fn all_first_space() -> [Self; 4] {
        [
            Self { a1: 0, a2: 0, second_space: false },
            Self { a1: 0, a2: 1, second_space: false },
            Self { a1: 1, a2: 0, second_space: false },
            Self { a1: 1, a2: 1, second_space: false },
        ]
    }

    /// Discrete spin orientation `(s^x, s^y, s^z)` carried by this point.
    pub fn orientation(&self) -> [f64; 3] {
        let sx = if self.a1 == 0 { 1.0 } else { -1.0 };
        let sy = if (self.a1 + self.a2) % 2 == 0 { 1.0 } else { -1.0 };
        let sz = if self.a2 == 0 { 1.0 } else { -1.0 };
        if self.second_space {
            [sx, sy, -sz]
        } else {
            [sx, sy, sz]
        }
    }

    /// The 2 × 2 operator `½ (u·σ + 1)` with `u` the orientation.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let [ux, uy, uz] = self.orientation();
        let half = 0.5;
        [
            [
                Complex64::new(half * (1.0 + uz), 0.0),
                Complex64::new(half * ux, -half * uy),
            ],
            [
                Complex64::new(half * ux, half * uy),
                Complex64::new(half * (1.0 - uz), 0.0),
            ],
        ]
    }
}

fn trace_product(rho: &[[Complex64; 2]; 2], a: &[[Complex64; 2]; 2]) -> Complex64 {
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..2 {
        for k in 0..2 {
            tr += rho[i][k] * a[k][i];
        }
    }
    tr
}

/// `W_α = ½ Tr(ρ A_α)` over the four first-space points. The weights sum to
/// `Tr ρ` and may individually be negative (quasi-probability).
pub fn wigner_weights(rho: &[[Complex64; 2]; 2]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (w, op) in out.iter_mut().zip(PhasePointOperator::all_first_space()) {
        *w = 0.5 * trace_product(rho, &op.matrix()).re;
    }
    out
}

/// Weights over all eight orientations from the two combined phase spaces
/// (each space contributes with weight ½).
pub fn wigner_weights_combined(rho: &[[Complex64; 2]; 2]) -> Vec<(PhasePointOperator, f64)> {
    let mut out = Vec::with_capacity(8);
    for second in [false, true] {
        for mut op in PhasePointOperator::all_first_space() {
            op.second_space = second;
            let w = 0.25 * trace_product(rho, &op.matrix()).re;
            out.push((op, w));
        }
    }
    out
}

/// Sampling guard: every quasi-probability must be non-negative (within
/// 1e-12) for the distribution to be sampled.
pub fn check_sampleable(weights: &[(PhasePointOperator, f64)]) -> Result<(), CoreError> {
    for (_, w) in weights {
        if *w < -1e-12 {
            return Err(CoreError::NegativeWigner { weight: *w });
        }
    }
    Ok(())
}

/// Per-site classical spin vectors; at t = 0 each component is ±1, so
/// `|s_i|² = 3` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSpinState {
    pub s: Vec<[f64; 3]>,
}

impl ClassicalSpinState {
    pub fn n(&self) -> usize {
        self.s.len()
    }

    pub fn norms_squared(&self) -> Vec<f64> {
        self.s.iter().map(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).collect()
    }
}

/// Draw the discrete Wigner sample of the fully x-polarized product state:
/// `s^x_i = +1`, `s^y_i` and `s^z_i` independently uniform on ±1.
pub fn sample_initial_x_polarized(n: usize, seed: u64) -> ClassicalSpinState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_x_polarized_with(n, &mut rng)
}

fn sample_x_polarized_with<R: Rng>(n: usize, rng: &mut R) -> ClassicalSpinState {
    let s = (0..n)
        .map(|_| {
            let sy = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let sz = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            [1.0, sy, sz]
        })
        .collect();
    ClassicalSpinState { s }
}

/// Classical energy `H(s) = -J Σ s^z_i s^z_{i+1} - h_x Σ s^x_i - h_z Σ s^z_i`.
pub fn classical_energy(params: &IsingParams, state: &ClassicalSpinState) -> f64 {
    let n = params.n;
    let mut e = 0.0;
    for i in 0..n {
        e -= params.j * state.s[i][2] * state.s[(i + 1) % n][2];
        e -= params.h_x * state.s[i][0];
        e -= params.h_z * state.s[i][2];
    }
    e
}

/// Poisson-bracket equations of motion `ṡ^α_i = {s^α_i, H}` with
/// `{s^α_i, s^β_j} = 2 δ_ij Σ_γ ε^{αβγ} s^γ_i`, which for the Ising chain
/// close to
///
/// ```text
/// ṡ^x_i =  2 s^y_i (J (s^z_{i-1} + s^z_{i+1}) + h_z)
/// ṡ^y_i = -2 s^x_i (J (s^z_{i-1} + s^z_{i+1}) + h_z) + 2 h_x s^z_i
/// ṡ^z_i = -2 h_x s^y_i
/// ```
pub fn classical_eom(params: &IsingParams, state: &ClassicalSpinState, out: &mut [[f64; 3]]) {
    let n = params.n;
    debug_assert_eq!(out.len(), n);
    for i in 0..n {
        let b = params.j * (state.s[(i + n - 1) % n][2] + state.s[(i + 1) % n][2]) + params.h_z;
        let [sx, sy, sz] = state.s[i];
        out[i] = [
            2.0 * sy * b,
            -2.0 * sx * b + 2.0 * params.h_x * sz,
            -2.0 * params.h_x * sy,
        ];
    }
}

fn rk4_step(params: &IsingParams, state: &mut ClassicalSpinState, dt: f64, scratch: &mut EomScratch) {
    let n = state.n();
    classical_eom(params, state, &mut scratch.k1);
    for i in 0..n {
        for c in 0..3 {
            scratch.tmp.s[i][c] = state.s[i][c] + 0.5 * dt * scratch.k1[i][c];
        }
    }
    classical_eom(params, &scratch.tmp, &mut scratch.k2);
    for i in 0..n {
        for c in 0..3 {
            scratch.tmp.s[i][c] = state.s[i][c] + 0.5 * dt * scratch.k2[i][c];
        }
    }
    classical_eom(params, &scratch.tmp, &mut scratch.k3);
    for i in 0..n {
        for c in 0..3 {
            scratch.tmp.s[i][c] = state.s[i][c] + dt * scratch.k3[i][c];
        }
    }
    classical_eom(params, &scratch.tmp, &mut scratch.k4);
    for i in 0..n {
        for c in 0..3 {
            state.s[i][c] += dt / 6.0
                * (scratch.k1[i][c] + 2.0 * scratch.k2[i][c] + 2.0 * scratch.k3[i][c] + scratch.k4[i][c]);
        }
    }
}

struct EomScratch {
    k1: Vec<[f64; 3]>,
    k2: Vec<[f64; 3]>,
    k3: Vec<[f64; 3]>,
    k4: Vec<[f64; 3]>,
    tmp: ClassicalSpinState,
}

impl EomScratch {
    fn new(n: usize) -> Self {
        Self {
            k1: vec![[0.0; 3]; n],
            k2: vec![[0.0; 3]; n],
            k3: vec![[0.0; 3]; n],
            k4: vec![[0.0; 3]; n],
            tmp: ClassicalSpinState { s: vec![[0.0; 3]; n] },
        }
    }
}

/// Trajectory-ensemble configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrajectoryEnsembleConfig {
    /// Number of trajectories R.
    pub trajectories: usize,
    /// Integrator step.
    pub dt: f64,
    pub seed: u64,
}

impl TrajectoryEnsembleConfig {
    pub fn new(trajectories: usize, seed: u64) -> Self {
        Self { trajectories, dt: 0.01, seed }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.trajectories < 1 {
            return Err(CoreError::InvalidParams("need at least one trajectory".into()));
        }
        if self.dt <= 0.0 {
            return Err(CoreError::InvalidParams("trajectory step must be positive".into()));
        }
        Ok(())
    }
}

/// Completed ensemble run with conservation diagnostics.
#[derive(Debug, Clone)]
pub struct DtwaRun {
    pub series: CorrelationSeries,
    /// Worst per-trajectory relative deviation of any |s_i|² from 3.
    pub max_norm_drift: f64,
    /// Worst per-trajectory relative drift of the classical energy.
    pub max_energy_drift: f64,
}

/// Run the semi-classical ensemble for a quench protocol.
///
/// The initial ensemble samples the x-polarized product state, which is the
/// `h_{x,i} → ∞` idealization of the pre-quench ground state; the protocol
/// must therefore start from a positive transverse field and zero
/// longitudinal field. Trajectory `r` draws its initial state from stream `r`
/// of the seeded generator, so any single trajectory is reproducible in
/// isolation, and the trajectory reduction is performed in a fixed order so
/// results do not depend on the thread count.
pub fn run_dtwa(protocol: &QuenchProtocol, config: &TrajectoryEnsembleConfig) -> Result<DtwaRun, CoreError> {
    protocol.validate()?;
    config.validate()?;
    if protocol.initial.h_x <= 0.0 || protocol.initial.h_z != 0.0 {
        return Err(CoreError::InvalidParams(
            "dTWA sampling is defined for the x-polarized initial state (h_x,i > 0, h_z,i = 0)".into(),
        ));
    }
    // The sampled distribution is the Wigner function of |+x⟩⟨+x|; verify it
    // is non-negative through the same guard that rejects general states.
    let plus_x = [
        [Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)],
        [Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)],
    ];
    check_sampleable(&wigner_weights_combined(&plus_x))?;

    let n = protocol.initial.n;
    let params_f = protocol.final_params;
    let dmax = n / 2;
    let times = &protocol.times;

    // observation times must land on integrator steps
    let mut obs_steps = Vec::with_capacity(times.len());
    for &t in times {
        let steps = t / config.dt;
        if (steps - steps.round()).abs() > 1e-6 {
            return Err(CoreError::InvalidParams(format!(
                "observation time {t} is not a multiple of dt = {}",
                config.dt
            )));
        }
        obs_steps.push(steps.round() as usize);
    }
    let total_steps = *obs_steps.last().unwrap();

    // fixed-size blocks keep the reduction order independent of threading
    const BLOCK: usize = 64;
    let nblocks = config.trajectories.div_ceil(BLOCK);
    let nt = times.len();

    struct BlockAcc {
        sum: Vec<f64>,   // nt × (dmax+1)
        sumsq: Vec<f64>, // nt × (dmax+1)
        norm_drift: f64,
        energy_drift: f64,
    }

    let blocks: Vec<BlockAcc> = (0..nblocks)
        .into_par_iter()
        .map(|block| {
            let lo = block * BLOCK;
            let hi = ((block + 1) * BLOCK).min(config.trajectories);
            let mut acc = BlockAcc {
                sum: vec![0.0; nt * (dmax + 1)],
                sumsq: vec![0.0; nt * (dmax + 1)],
                norm_drift: 0.0,
                energy_drift: 0.0,
            };
            let mut scratch = EomScratch::new(n);
            let mut row = vec![0.0; dmax + 1];
            for traj in lo..hi {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(traj as u64 + 1);
                let mut state = sample_x_polarized_with(n, &mut rng);
                let e0 = classical_energy(&params_f, &state);
                let mut next_obs = 0usize;
                for step in 0..=total_steps {
                    while next_obs < obs_steps.len() && obs_steps[next_obs] == step {
                        for (d, r) in row.iter_mut().enumerate() {
                            let mut corr = 0.0;
                            for i in 0..n {
                                corr += state.s[i][2] * state.s[(i + d) % n][2];
                            }
                            *r = corr / n as f64;
                        }
                        for (slot, r) in acc.sum[next_obs * (dmax + 1)..(next_obs + 1) * (dmax + 1)]
                            .iter_mut()
                            .zip(&row)
                        {
                            *slot += r;
                        }
                        for (slot, r) in acc.sumsq[next_obs * (dmax + 1)..(next_obs + 1) * (dmax + 1)]
                            .iter_mut()
                            .zip(&row)
                        {
                            *slot += r * r;
                        }
                        next_obs += 1;
                    }
                    if step == total_steps {
                        break;
                    }
                    rk4_step(&params_f, &mut state, config.dt, &mut scratch);
                }
                for nrm in state.norms_squared() {
                    acc.norm_drift = acc.norm_drift.max((nrm - 3.0).abs() / 3.0);
                }
                let e1 = classical_energy(&params_f, &state);
                acc.energy_drift = acc.energy_drift.max((e1 - e0).abs() / e0.abs().max(1e-12));
            }
            acc
        })
        .collect();

    let r = config.trajectories as f64;
    let mut values = vec![vec![0.0; dmax + 1]; nt];
    let mut stderr = vec![vec![0.0; dmax + 1]; nt];
    let mut max_norm_drift = 0.0f64;
    let mut max_energy_drift = 0.0f64;
    let mut sum = vec![0.0; nt * (dmax + 1)];
    let mut sumsq = vec![0.0; nt * (dmax + 1)];
    for acc in &blocks {
        for (dst, src) in sum.iter_mut().zip(&acc.sum) {
            *dst += src;
        }
        for (dst, src) in sumsq.iter_mut().zip(&acc.sumsq) {
            *dst += src;
        }
        max_norm_drift = max_norm_drift.max(acc.norm_drift);
        max_energy_drift = max_energy_drift.max(acc.energy_drift);
    }
    for ti in 0..nt {
        // d = 0 is the operator identity (σ^z)² = 1, not a trajectory average
        values[ti][0] = 1.0;
        stderr[ti][0] = 0.0;
        for d in 1..=dmax {
            let mean = sum[ti * (dmax + 1) + d] / r;
            let var = (sumsq[ti * (dmax + 1) + d] / r - mean * mean).max(0.0);
            values[ti][d] = mean;
            stderr[ti][d] = (var / r).sqrt();
        }
    }

    let series = CorrelationSeries::new(times.clone(), values, Some(stderr), "dtwa".into())?;
    Ok(DtwaRun { series, max_norm_drift, max_energy_drift })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bloch_state(r: [f64; 3]) -> [[Complex64; 2]; 2] {
        [
            [
                Complex64::new(0.5 * (1.0 + r[2]), 0.0),
                Complex64::new(0.5 * r[0], -0.5 * r[1]),
            ],
            [
                Complex64::new(0.5 * r[0], 0.5 * r[1]),
                Complex64::new(0.5 * (1.0 - r[2]), 0.0),
            ],
        ]
    }

    #[test]
    fn phase_point_operator_algebra() {
        let ops = PhasePointOperator::all_first_space();
        for (i, a) in ops.iter().enumerate() {
            let ma = a.matrix();
            // Tr A = 1, Hermitian
            assert!((ma[0][0] + ma[1][1] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
            assert!((ma[0][1] - ma[1][0].conj()).norm() < 1e-15);
            for (j, b) in ops.iter().enumerate() {
                let tr = trace_product(&a.matrix(), &b.matrix());
                let expect = if i == j { 2.0 } else { 0.0 };
                assert!((tr - Complex64::new(expect, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn combined_spaces_cover_all_orientations() {
        let mut seen = std::collections::HashSet::new();
        for (op, _) in wigner_weights_combined(&bloch_state([0.0, 0.0, 0.0])) {
            let o = op.orientation();
            seen.insert((o[0] as i8, o[1] as i8, o[2] as i8));
        }
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn weights_maximally_mixed() {
        let w = wigner_weights(&bloch_state([0.0, 0.0, 0.0]));
        for x in w {
            assert!((x - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn weights_sum_to_trace_for_random_states() {
        for r in [[0.3, -0.1, 0.4], [0.0, 0.9, 0.1], [-0.5, -0.5, -0.5]] {
            let w = wigner_weights(&bloch_state(r));
            let sum: f64 = w.iter().sum();
            assert!((sum - 1.0).abs() < 1e-14);
            let comb = wigner_weights_combined(&bloch_state(r));
            let sum: f64 = comb.iter().map(|(_, w)| w).sum();
            assert!((sum - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn x_polarized_weights_quarter_on_plus_x_points() {
        let rho = bloch_state([1.0, 0.0, 0.0]);
        let comb = wigner_weights_combined(&rho);
        for (op, w) in comb {
            let o = op.orientation();
            if o[0] > 0.0 {
                assert!((w - 0.25).abs() < 1e-14, "weight {w} at {o:?}");
            } else {
                assert!(w.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn negative_wigner_is_rejected() {
        let s = 1.0 / 3f64.sqrt();
        let rho = bloch_state([-s, -s, -s]);
        let comb = wigner_weights_combined(&rho);
        assert!(matches!(check_sampleable(&comb), Err(CoreError::NegativeWigner { .. })));
    }

    #[test]
    fn initial_sampling_statistics() {
        let n = 8;
        let draws = 20_000;
        let mut my = 0.0;
        let mut mz = 0.0;
        let mut myz = 0.0;
        for seed in 0..draws {
            let s = sample_initial_x_polarized(n, seed);
            for i in 0..n {
                assert_eq!(s.s[i][0], 1.0);
                my += s.s[i][1];
                mz += s.s[i][2];
                myz += s.s[i][1] * s.s[i][2];
            }
            for nrm in s.norms_squared() {
                assert_eq!(nrm, 3.0);
            }
        }
        let count = (draws as usize * n) as f64;
        assert!((my / count).abs() < 0.02);
        assert!((mz / count).abs() < 0.02);
        assert!((myz / count).abs() < 0.02);
        assert_eq!(sample_initial_x_polarized(5, 7), sample_initial_x_polarized(5, 7));
        assert_ne!(sample_initial_x_polarized(5, 7), sample_initial_x_polarized(5, 8));
    }

    /// Independent oracle: evaluate the Poisson bracket
    /// `ṡ^α_i = Σ_{β,j} {s^α_i, s^β_j} ∂H/∂s^β_j` with the bracket formula
    /// and finite-difference derivatives of the classical energy.
    fn eom_finite_difference(params: &IsingParams, state: &ClassicalSpinState) -> Vec<[f64; 3]> {
        let n = state.n();
        let eps_tensor = |a: usize, b: usize, c: usize| -> f64 {
            match (a, b, c) {
                (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
                (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
                _ => 0.0,
            }
        };
        let h = 1e-6;
        let mut grad = vec![[0.0; 3]; n];
        for j in 0..n {
            for beta in 0..3 {
                let mut plus = state.clone();
                plus.s[j][beta] += h;
                let mut minus = state.clone();
                minus.s[j][beta] -= h;
                grad[j][beta] =
                    (classical_energy(params, &plus) - classical_energy(params, &minus)) / (2.0 * h);
            }
        }
        let mut out = vec![[0.0; 3]; n];
        for i in 0..n {
            for alpha in 0..3 {
                let mut acc = 0.0;
                for beta in 0..3 {
                    for gamma in 0..3 {
                        acc += 2.0 * eps_tensor(alpha, beta, gamma) * state.s[i][gamma] * grad[i][beta];
                    }
                }
                out[i][alpha] = acc;
            }
        }
        out
    }

    #[test]
    fn eom_matches_finite_difference_bracket() {
        let params = IsingParams::new(6, 1.7, 0.6);
        let state = sample_initial_x_polarized(6, 3);
        // perturb off the lattice points so the test is not special
        let mut state = state;
        for (i, s) in state.s.iter_mut().enumerate() {
            s[0] += 0.1 * (i as f64).sin();
            s[1] -= 0.07 * (i as f64).cos();
        }
        let mut closed = vec![[0.0; 3]; 6];
        classical_eom(&params, &state, &mut closed);
        let fd = eom_finite_difference(&params, &state);
        for i in 0..6 {
            for c in 0..3 {
                assert!(
                    (closed[i][c] - fd[i][c]).abs() < 1e-6,
                    "site {i} comp {c}: {} vs {}",
                    closed[i][c],
                    fd[i][c]
                );
            }
        }
    }

    #[test]
    fn sz_is_conserved_without_transverse_field() {
        let params = IsingParams::new(5, 0.0, 0.0);
        let state = sample_initial_x_polarized(5, 11);
        let mut dot = vec![[0.0; 3]; 5];
        classical_eom(&params, &state, &mut dot);
        for d in &dot {
            assert_eq!(d[2], 0.0);
        }
    }

    #[test]
    fn spin_norm_is_an_exact_invariant_of_the_flow() {
        let params = IsingParams::new(7, 1.3, 0.8);
        let mut state = sample_initial_x_polarized(7, 4);
        for (i, s) in state.s.iter_mut().enumerate() {
            s[1] += 0.2 * (i as f64 + 0.3).sin();
        }
        let mut dot = vec![[0.0; 3]; 7];
        classical_eom(&params, &state, &mut dot);
        for i in 0..7 {
            let sdot: f64 = (0..3).map(|c| state.s[i][c] * dot[i][c]).sum();
            assert!(sdot.abs() < 1e-12);
        }
    }

    #[test]
    fn single_spin_precesses_about_x_with_period_pi_over_hx() {
        // J = 0 decouples the sites; each precesses about x at frequency 2 h_x.
        let h_x = 1.3;
        let params = IsingParams { j: 0.0, h_x, h_z: 0.0, n: 2 };
        let mut state = ClassicalSpinState { s: vec![[1.0, 1.0, -1.0], [1.0, -1.0, 1.0]] };
        let start = state.clone();
        let period = std::f64::consts::PI / h_x;
        let steps = 4000;
        let dt = period / steps as f64;
        let mut scratch = EomScratch::new(2);
        for _ in 0..steps {
            rk4_step(&params, &mut state, dt, &mut scratch);
        }
        for i in 0..2 {
            for c in 0..3 {
                assert!(
                    (state.s[i][c] - start.s[i][c]).abs() < 1e-8,
                    "site {i} comp {c} after one period: {} vs {}",
                    state.s[i][c],
                    start.s[i][c]
                );
            }
        }
    }

    #[test]
    fn run_requires_x_polarized_initial_conditions() {
        let bad = QuenchProtocol::uniform(
            IsingParams::new(6, 100.0, 0.5),
            IsingParams::tfim(6, 1.0),
            1.0,
            4,
        )
        .unwrap();
        assert!(run_dtwa(&bad, &TrajectoryEnsembleConfig::new(10, 1)).is_err());
    }

    #[test]
    fn quench_to_zero_transverse_field_stays_statistically_zero() {
        let protocol = QuenchProtocol::uniform(
            IsingParams::tfim(10, 100.0),
            IsingParams::tfim(10, 0.0),
            3.0,
            12,
        )
        .unwrap();
        let run = run_dtwa(&protocol, &TrajectoryEnsembleConfig::new(2000, 42)).unwrap();
        for (ti, row) in run.series.values.iter().enumerate() {
            for d in 1..row.len() {
                let err = run.series.stderr.as_ref().unwrap()[ti][d];
                assert!(
                    row[d].abs() <= 2.0 * err,
                    "C_{d}(t{ti}) = {} vs 2σ = {}",
                    row[d],
                    2.0 * err
                );
            }
        }
    }

    #[test]
    fn trajectories_conserve_norm_and_energy() {
        let protocol = QuenchProtocol::uniform(
            IsingParams::tfim(8, 100.0),
            IsingParams::tfim(8, 2.0),
            3.0,
            6,
        )
        .unwrap();
        let run = run_dtwa(&protocol, &TrajectoryEnsembleConfig::new(200, 9)).unwrap();
        assert!(run.max_norm_drift < 1e-6, "norm drift {}", run.max_norm_drift);
        assert!(run.max_energy_drift < 1e-5, "energy drift {}", run.max_energy_drift);
    }

    #[test]
    fn stderr_scales_like_inverse_sqrt_r() {
        let protocol = QuenchProtocol::uniform(
            IsingParams::tfim(8, 100.0),
            IsingParams::tfim(8, 1.0),
            1.0,
            4,
        )
        .unwrap();
        let err_of = |r: usize| {
            let run = run_dtwa(&protocol, &TrajectoryEnsembleConfig::new(r, 5)).unwrap();
            let errs = run.series.stderr.unwrap();
            errs.last().unwrap()[1]
        };
        let e2 = err_of(100);
        let e3 = err_of(1000);
        let e4 = err_of(10_000);
        let r32 = e2 / e3;
        let r43 = e3 / e4;
        let root10 = 10f64.sqrt();
        assert!(r32 > root10 / 1.7 && r32 < root10 * 1.7, "ratio {r32}");
        assert!(r43 > root10 / 1.7 && r43 < root10 * 1.7, "ratio {r43}");
    }

    #[test]
    fn runs_are_deterministic_under_seed() {
        let protocol = QuenchProtocol::uniform(
            IsingParams::tfim(6, 100.0),
            IsingParams::tfim(6, 1.5),
            0.5,
            2,
        )
        .unwrap();
        let a = run_dtwa(&protocol, &TrajectoryEnsembleConfig::new(64, 123)).unwrap();
        let b = run_dtwa(&protocol, &TrajectoryEnsembleConfig::new(64, 123)).unwrap();
        assert_eq!(a.series.values, b.series.values);
        let c = run_dtwa(&protocol, &TrajectoryEnsembleConfig::new(64, 124)).unwrap();
        assert_ne!(a.series.values, c.series.values);
    }
}
