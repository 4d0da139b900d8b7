//! Stochastic-reconfiguration ground-state search and time-dependent
//! variational Monte Carlo over RBM parameters.
//!
//! Both use the covariance matrix and force vector
//!
//! ```text
//! S_kk' = ⟨O_k* O_k'⟩ - ⟨O_k*⟩⟨O_k'⟩
//! F_k   = ⟨E_loc O_k*⟩ - ⟨E_loc⟩⟨O_k*⟩
//! ```
//!
//! estimated either exactly (summing the full Hilbert space, with an orbit
//! reduction for the translation-symmetric ansatz) or from Metropolis
//! samples. SR iterates `W ← W - γ (S + λ diag S)^{-1} F`; tVMC integrates
//! `Ẇ = -i S⁺ F` with a fixed-step fourth-order scheme, where `S⁺` is the
//! eigenvalue-truncated pseudo-inverse of the diagonally regularized
//! covariance.

use faer::{c64, Mat};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::CorrelationSeries;
use crate::error::CoreError;
use crate::exact::DENSE_LIMIT;
use crate::linalg;
use crate::rbm::{self, ln_cosh_tanh, Ansatz, LookupTable, MetropolisConfig};
use crate::sector::TranslationSector;
use crate::spin::{diagonal_energy_index, IsingParams, QuenchProtocol, SpinConfig};

const LN_2: f64 = std::f64::consts::LN_2;

/// Estimator backend: exact Hilbert-space summation (N ≤ 14) or a Metropolis
/// chain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum EstimatorBackend {
    Exact,
    Sampled(MetropolisConfig),
}

/// Covariance/force estimates at one parameter point.
#[derive(Debug, Clone)]
pub struct SrEstimates {
    pub dim: usize,
    /// Hermitian covariance, row-major `dim × dim`.
    pub s: Vec<Complex64>,
    pub f: Vec<Complex64>,
    pub energy: Complex64,
    pub energy_variance: f64,
    /// `None` marks the exact backend.
    pub sample_count: Option<usize>,
    pub acceptance_rate: Option<f64>,
}

impl SrEstimates {
    pub fn s_at(&self, k: usize, l: usize) -> Complex64 {
        self.s[k * self.dim + l]
    }

    /// Max Hermiticity defect `|S - S†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..self.dim {
            for l in 0..=k {
                worst = worst.max((self.s_at(k, l) - self.s_at(l, k).conj()).norm());
            }
        }
        worst
    }
}

/// Per-configuration scratch shared by the exact and sampled paths.
struct RowData {
    log_amp: Complex64,
    e_diag: f64,
}

/// Everything needed to evaluate estimates and observables for a fixed
/// ansatz shape; the orbit table is built once and reused across calls.
pub struct EstimatorContext {
    n: usize,
    /// Orbit table when the ansatz is translation symmetric (halves of the
    /// work collapse onto orbit representatives); `None` enumerates all
    /// configurations.
    sector: Option<TranslationSector>,
}

impl EstimatorContext {
    pub fn new(ansatz: &Ansatz) -> Result<Self, CoreError> {
        let n = ansatz.n();
        if n > DENSE_LIMIT {
            return Err(CoreError::SizeLimit { n, limit: DENSE_LIMIT });
        }
        let sector = if ansatz.is_symmetric() {
            Some(TranslationSector::new(n)?)
        } else {
            None
        };
        Ok(Self { n, sector })
    }

    fn members(&self) -> usize {
        match &self.sector {
            Some(s) => s.dim(),
            None => 1usize << self.n,
        }
    }

    fn index_of(&self, member: usize) -> usize {
        match &self.sector {
            Some(s) => s.rep_index(member),
            None => member,
        }
    }

    fn multiplicity(&self, member: usize) -> f64 {
        match &self.sector {
            Some(s) => s.orbit_size(member) as f64,
            None => 1.0,
        }
    }

    fn member_of_index(&self, idx: usize) -> usize {
        match &self.sector {
            Some(s) => s.row_of(idx),
            None => idx,
        }
    }
}

/// Per-call scratch for the serial estimator passes. The per-configuration
/// work is deliberately not parallelized: the rows are small, and on the
/// low-core machines this targets, task and allocator churn were measured to
/// cost far more than the arithmetic; the heavy covariance GEMM below is the
/// part that parallelizes well.
struct EstimatorScratch {
    theta: Vec<Complex64>,
    tanh: Vec<Complex64>,
}

impl EstimatorScratch {
    fn new(m: usize) -> Self {
        Self {
            theta: vec![Complex64::new(0.0, 0.0); m],
            tanh: vec![Complex64::new(0.0, 0.0); m],
        }
    }
}

fn theta_tanh_logamp(
    dense: &rbm::RbmState,
    idx: usize,
    scratch: &mut EstimatorScratch,
) -> Complex64 {
    let n = dense.n;
    let m = dense.m;
    scratch.theta.copy_from_slice(&dense.b);
    let mut bias = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let vi = if idx >> i & 1 == 0 { 1.0 } else { -1.0 };
        bias += vi * dense.a[i];
        let row = &dense.w[i * m..(i + 1) * m];
        for (t, wij) in scratch.theta.iter_mut().zip(row) {
            *t += vi * wij;
        }
    }
    let mut log_amp = bias;
    for (t, out) in scratch.theta.iter().zip(scratch.tanh.iter_mut()) {
        let (lc, th) = ln_cosh_tanh(*t);
        log_amp += LN_2 + lc;
        *out = th;
    }
    log_amp
}

/// Estimate `S`, `F`, and the energy moments for the current parameters.
pub fn estimate_s_f(
    ansatz: &Ansatz,
    params: &IsingParams,
    backend: &EstimatorBackend,
) -> Result<SrEstimates, CoreError> {
    match backend {
        EstimatorBackend::Exact => {
            let ctx = EstimatorContext::new(ansatz)?;
            estimate_exact(ansatz, params, &ctx)
        }
        EstimatorBackend::Sampled(cfg) => estimate_sampled(ansatz, params, cfg),
    }
}

pub(crate) fn estimate_exact(
    ansatz: &Ansatz,
    params: &IsingParams,
    ctx: &EstimatorContext,
) -> Result<SrEstimates, CoreError> {
    let dense = ansatz.dense();
    let p = ansatz.param_count();
    let members = ctx.members();
    let n = ctx.n;

    let mut o_flat = vec![Complex64::new(0.0, 0.0); members * p];
    let mut rows: Vec<RowData> = Vec::with_capacity(members);

    // pass 1: angles, log-amplitudes, derivatives
    let mut scratch = EstimatorScratch::new(dense.m);
    for (member, o_row) in o_flat.chunks_mut(p).enumerate() {
        let idx = ctx.index_of(member);
        let log_amp = theta_tanh_logamp(&dense, idx, &mut scratch);
        let v = SpinConfig::from_index(idx, n);
        ansatz.derivatives_from_tanh(&v, &scratch.tanh, o_row);
        rows.push(RowData { log_amp, e_diag: diagonal_energy_index(params, idx) });
    }

    // weights: multiplicity * |c|^2, normalized against the largest magnitude
    let max_re = rows.iter().map(|r| r.log_amp.re).fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = rows
        .iter()
        .enumerate()
        .map(|(member, r)| ctx.multiplicity(member) * (2.0 * (r.log_amp.re - max_re)).exp())
        .collect();
    let norm: f64 = probs.iter().sum();
    for w in &mut probs {
        *w /= norm;
    }

    // pass 2: local energies via the already-known flipped amplitudes
    let log_amps: Vec<Complex64> = rows.iter().map(|r| r.log_amp).collect();
    let e_loc: Vec<Complex64> = rows
        .iter()
        .enumerate()
        .map(|(member, r)| {
            let idx = ctx.index_of(member);
            let mut e = Complex64::new(r.e_diag, 0.0);
            if params.h_x != 0.0 {
                for i in 0..n {
                    let flipped = ctx.member_of_index(idx ^ (1 << i));
                    e += -params.h_x * (log_amps[flipped] - r.log_amp).exp();
                }
            }
            e
        })
        .collect();

    Ok(assemble_estimates(p, members, &mut o_flat, &probs, &e_loc, None, None))
}

fn estimate_sampled(
    ansatz: &Ansatz,
    params: &IsingParams,
    cfg: &MetropolisConfig,
) -> Result<SrEstimates, CoreError> {
    let dense = ansatz.dense();
    let p = ansatz.param_count();
    let run = rbm::sample_metropolis(&dense, cfg);
    let count = run.samples.len();
    let mut o_flat = vec![Complex64::new(0.0, 0.0); count * p];
    let mut scratch = EstimatorScratch::new(dense.m);
    let e_loc: Vec<Complex64> = o_flat
        .chunks_mut(p)
        .zip(run.samples.iter())
        .map(|(o_row, v)| {
            let _ = theta_tanh_logamp(&dense, v.to_index(), &mut scratch);
            ansatz.derivatives_from_tanh(v, &scratch.tanh, o_row);
            let table = LookupTable::new(&dense, v.clone());
            rbm::local_energy_with_table(&dense, params, &table)
        })
        .collect();
    let probs = vec![1.0 / count as f64; count];
    Ok(assemble_estimates(
        p,
        count,
        &mut o_flat,
        &probs,
        &e_loc,
        Some(count),
        Some(run.acceptance_rate()),
    ))
}

fn assemble_estimates(
    p: usize,
    members: usize,
    o_flat: &mut [Complex64],
    probs: &[f64],
    e_loc: &[Complex64],
    sample_count: Option<usize>,
    acceptance_rate: Option<f64>,
) -> SrEstimates {
    // means over the unweighted rows
    let mut o_mean = vec![Complex64::new(0.0, 0.0); p];
    let mut energy = Complex64::new(0.0, 0.0);
    for member in 0..members {
        let w = probs[member];
        let row = &o_flat[member * p..(member + 1) * p];
        for (m, o) in o_mean.iter_mut().zip(row) {
            *m += w * o;
        }
        energy += w * e_loc[member];
    }
    let energy_variance: f64 = (0..members)
        .map(|s| probs[s] * (e_loc[s] - energy).norm_sqr())
        .sum();

    // F_raw and S_raw from sqrt(p)-weighted rows
    for member in 0..members {
        let w = probs[member].sqrt();
        for o in &mut o_flat[member * p..(member + 1) * p] {
            *o *= w;
        }
    }
    // row-major (member, param) is column-major (param, member): zero-copy view
    let o_t = faer::MatRef::from_column_major_slice(
        unsafe { std::slice::from_raw_parts(o_flat.as_ptr() as *const c64, o_flat.len()) },
        p,
        members,
    );
    let mut s_mat = Mat::<c64>::zeros(p, p);
    faer::linalg::matmul::matmul(
        s_mat.as_mut(),
        faer::Accum::Replace,
        o_t.conjugate(),
        o_t.transpose(),
        c64::new(1.0, 0.0),
        faer::Par::rayon(0),
    );

    let mut f = vec![Complex64::new(0.0, 0.0); p];
    for member in 0..members {
        let w = probs[member].sqrt();
        let z = w * e_loc[member];
        let row = &o_flat[member * p..(member + 1) * p];
        for (fk, o) in f.iter_mut().zip(row) {
            *fk += o.conj() * z;
        }
    }
    for (fk, om) in f.iter_mut().zip(&o_mean) {
        *fk -= energy * om.conj();
    }

    let mut s = vec![Complex64::new(0.0, 0.0); p * p];
    for k in 0..p {
        for l in 0..p {
            let raw = linalg::from_c64(s_mat[(k, l)]) - o_mean[k].conj() * o_mean[l];
            s[k * p + l] = raw;
        }
    }
    // Hermitian symmetrization
    for k in 0..p {
        for l in 0..k {
            let avg = 0.5 * (s[k * p + l] + s[l * p + k].conj());
            s[k * p + l] = avg;
            s[l * p + k] = avg.conj();
        }
        s[k * p + k] = Complex64::new(s[k * p + k].re, 0.0);
    }

    SrEstimates { dim: p, s, f, energy, energy_variance, sample_count, acceptance_rate }
}

/// Per-iteration SR regularization `λ(p) = max(λ0 · b^p, λ_min)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizationSchedule {
    pub lambda0: f64,
    pub decay: f64,
    pub floor: f64,
}

impl Default for RegularizationSchedule {
    fn default() -> Self {
        Self { lambda0: 100.0, decay: 0.9, floor: 1e-4 }
    }
}

impl RegularizationSchedule {
    pub fn lambda(&self, iteration: usize) -> f64 {
        (self.lambda0 * self.decay.powi(iteration as i32)).max(self.floor)
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.lambda0 <= 0.0 || self.floor <= 0.0 || !(0.0..=1.0).contains(&self.decay) {
            return Err(CoreError::InvalidParams("regularization schedule must be positive and non-increasing".into()));
        }
        Ok(())
    }
}

/// Solve `(S + λ·diag S) δ = F`. Directions with vanishing diagonal variance
/// carry no information and are pinned to δ = 0 rather than amplified.
/// Returns the update and the relative residual of the solved system.
pub fn solve_regularized(
    est: &SrEstimates,
    lambda: f64,
) -> Result<(Vec<Complex64>, f64), CoreError> {
    let p = est.dim;
    let f_norm: f64 = est.f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if f_norm == 0.0 {
        return Ok((vec![Complex64::new(0.0, 0.0); p], 0.0));
    }
    let max_diag = (0..p).map(|k| est.s_at(k, k).re).fold(0.0f64, f64::max);
    let dead_floor = 1e-12 * max_diag.max(f64::MIN_POSITIVE);
    let dead: Vec<bool> = (0..p).map(|k| est.s_at(k, k).re <= dead_floor).collect();

    let mut a = Mat::<c64>::zeros(p, p);
    for k in 0..p {
        for l in 0..p {
            a[(k, l)] = if dead[k] || dead[l] {
                if k == l {
                    c64::new(1.0, 0.0)
                } else {
                    c64::new(0.0, 0.0)
                }
            } else {
                let mut z = est.s_at(k, l);
                if k == l {
                    z += lambda * est.s_at(k, k).re;
                }
                linalg::to_c64(z)
            };
        }
    }
    let rhs: Vec<Complex64> = (0..p)
        .map(|k| if dead[k] { Complex64::new(0.0, 0.0) } else { est.f[k] })
        .collect();
    let delta = linalg::solve_hermitian_pd(a.as_ref(), &rhs)?;

    let mut resid = 0.0f64;
    for k in 0..p {
        let mut acc = Complex64::new(0.0, 0.0);
        for l in 0..p {
            acc += linalg::from_c64(a[(k, l)]) * delta[l];
        }
        resid += (acc - rhs[k]).norm_sqr();
    }
    let resid = resid.sqrt() / f_norm;
    Ok((delta, resid))
}

/// One SR update `W ← W - γ δ` with `(S + λ diag S) δ = F`.
pub fn sr_step(
    ansatz: &Ansatz,
    est: &SrEstimates,
    gamma: f64,
    lambda: f64,
) -> Result<(Ansatz, f64), CoreError> {
    let (delta, residual) = solve_regularized(est, lambda)?;
    if residual > 1e-8 {
        return Err(CoreError::SingularSystem(format!(
            "regularized solve residual {residual:.3e} exceeds 1e-8"
        )));
    }
    let mut params = ansatz.pack();
    for (w, d) in params.iter_mut().zip(&delta) {
        *w -= gamma * d;
    }
    let mut next = ansatz.clone();
    next.unpack(&params)?;
    Ok((next, residual))
}

/// SR driver configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SrConfig {
    pub gamma: f64,
    pub schedule: RegularizationSchedule,
    pub max_iters: usize,
    pub seed: u64,
    /// Width of the Gaussian parameter initialization.
    pub init_sigma: f64,
    pub backend: EstimatorBackend,
}

impl Default for SrConfig {
    fn default() -> Self {
        Self {
            gamma: 0.05,
            schedule: RegularizationSchedule::default(),
            max_iters: 2000,
            seed: 1,
            init_sigma: 0.01,
            backend: EstimatorBackend::Exact,
        }
    }
}

/// One line of the SR convergence log.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SrIteration {
    pub iteration: usize,
    pub energy_re: f64,
    pub energy_im: f64,
    pub variance: f64,
    pub lambda: f64,
}

/// Converged SR result with its full per-iteration log.
#[derive(Debug, Clone)]
pub struct SrSolve {
    pub ansatz: Ansatz,
    pub log: Vec<SrIteration>,
    pub iterations: usize,
}

impl SrSolve {
    pub fn final_energy(&self) -> Complex64 {
        let last = self.log.last().expect("SR log is never empty");
        Complex64::new(last.energy_re, last.energy_im)
    }

    /// Smoothed (window-averaged) energy trend: true when the averaged real
    /// part never rises by more than `slack` after `start` iterations.
    pub fn smoothed_energy_is_monotone(&self, window: usize, start: usize, slack: f64) -> bool {
        let e: Vec<f64> = self.log.iter().map(|l| l.energy_re).collect();
        if e.len() < start + 2 * window {
            return true;
        }
        let smooth: Vec<f64> = e
            .windows(window)
            .map(|w| w.iter().sum::<f64>() / window as f64)
            .collect();
        smooth[start..]
            .windows(2)
            .all(|w| w[1] <= w[0] + slack)
    }
}

/// Variational ground-state search from random parameters. Iterates SR until
/// the relative energy change, averaged over 50 iterations, drops below 1e-8
/// or `max_iters` is reached; the latter is reported as an error carrying the
/// final diagnostics.
pub fn ground_state_solve(
    params: &IsingParams,
    alpha: usize,
    symmetric: bool,
    config: &SrConfig,
) -> Result<SrSolve, CoreError> {
    if alpha < 1 {
        return Err(CoreError::InvalidParams("hidden-unit density alpha must be >= 1".into()));
    }
    params.validate()?;
    config.schedule.validate()?;
    let mut ansatz = Ansatz::random(params.n, alpha, symmetric, config.init_sigma, config.seed);
    let ctx = match &config.backend {
        EstimatorBackend::Exact => Some(EstimatorContext::new(&ansatz)?),
        EstimatorBackend::Sampled(_) => None,
    };

    let mut log = Vec::with_capacity(config.max_iters.min(4096));
    let mut recent: std::collections::VecDeque<f64> = std::collections::VecDeque::new();
    let mut prev_energy: Option<f64> = None;

    for iteration in 0..config.max_iters {
        let est = match (&config.backend, &ctx) {
            (EstimatorBackend::Exact, Some(ctx)) => estimate_exact(&ansatz, params, ctx)?,
            (EstimatorBackend::Sampled(cfg), _) => {
                let mut cfg = cfg.clone();
                // decorrelate chains between iterations deterministically
                cfg.seed = cfg.seed.wrapping_add(iteration as u64);
                estimate_sampled(&ansatz, params, &cfg)?
            }
            _ => unreachable!(),
        };
        let lambda = config.schedule.lambda(iteration);
        log.push(SrIteration {
            iteration,
            energy_re: est.energy.re,
            energy_im: est.energy.im,
            variance: est.energy_variance,
            lambda,
        });

        if let Some(prev) = prev_energy {
            let rel = (est.energy.re - prev).abs() / est.energy.re.abs().max(1e-300);
            recent.push_back(rel);
            if recent.len() > 50 {
                recent.pop_front();
            }
            if recent.len() == 50 && recent.iter().sum::<f64>() / 50.0 < 1e-8 {
                return Ok(SrSolve { ansatz, log, iterations: iteration + 1 });
            }
        }
        prev_energy = Some(est.energy.re);

        let (next, _residual) = sr_step(&ansatz, &est, config.gamma, lambda)?;
        ansatz = next;
    }

    let last = log.last().copied();
    Err(CoreError::NotConverged {
        iters: config.max_iters,
        details: match last {
            Some(l) => format!("final energy {:.12e}, variance {:.3e}", l.energy_re, l.variance),
            None => "no iterations performed".into(),
        },
    })
}

/// tVMC configuration. Only the classical fourth-order fixed-step integrator
/// is implemented.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TvmcConfig {
    pub dt: f64,
    pub integrator_order: u8,
    /// Diagonal regularization added before the pseudo-inverse.
    pub diag_shift: f64,
    /// Relative eigenvalue cutoff of the pseudo-inverse.
    pub svd_cutoff: f64,
    pub backend: EstimatorBackend,
}

impl Default for TvmcConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            integrator_order: 4,
            diag_shift: 1e-4,
            svd_cutoff: 1e-8,
            backend: EstimatorBackend::Exact,
        }
    }
}

impl TvmcConfig {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.dt <= 0.0 {
            return Err(CoreError::InvalidParams("tVMC step size must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.svd_cutoff) || self.svd_cutoff == 0.0 {
            return Err(CoreError::InvalidParams("pseudo-inverse cutoff must lie in (0, 1)".into()));
        }
        if self.integrator_order != 4 {
            return Err(CoreError::InvalidParams(
                "only the classical fourth-order integrator is implemented".into(),
            ));
        }
        if self.diag_shift < 0.0 {
            return Err(CoreError::InvalidParams("diagonal shift must be non-negative".into()));
        }
        Ok(())
    }
}

/// Apply the regularized pseudo-inverse: eigendecompose
/// `S + shift·diag(S)`, drop eigenvalues below `cutoff · λ_max`, and apply
/// the inverse of the rest to `F`.
pub fn pinv_apply(
    est: &SrEstimates,
    diag_shift: f64,
    cutoff: f64,
    rhs: &[Complex64],
) -> Result<Vec<Complex64>, CoreError> {
    let p = est.dim;
    let mut a = Mat::<c64>::zeros(p, p);
    for k in 0..p {
        for l in 0..p {
            let mut z = est.s_at(k, l);
            if k == l {
                z += diag_shift * est.s_at(k, k).re;
            }
            a[(k, l)] = linalg::to_c64(z);
        }
    }
    let (evals, u) = linalg::eigh_hermitian(a.as_ref())?;
    let lam_max = evals.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    if lam_max == 0.0 {
        return Err(CoreError::RankZero);
    }
    let keep: Vec<usize> = (0..p).filter(|&k| evals[k].abs() >= cutoff * lam_max).collect();
    if keep.is_empty() {
        return Err(CoreError::RankZero);
    }
    let mut out = vec![Complex64::new(0.0, 0.0); p];
    for &mode in &keep {
        // (u_mode† rhs) / λ_mode, accumulated back along u_mode
        let mut proj = Complex64::new(0.0, 0.0);
        for k in 0..p {
            proj += linalg::from_c64(u[(k, mode)]).conj() * rhs[k];
        }
        proj /= evals[mode];
        for k in 0..p {
            out[k] += linalg::from_c64(u[(k, mode)]) * proj;
        }
    }
    Ok(out)
}

/// Right-hand side of the parameter flow, `Ẇ = -i · S⁺ F`.
pub fn tvmc_rhs(
    ansatz: &Ansatz,
    params_final: &IsingParams,
    config: &TvmcConfig,
) -> Result<Vec<Complex64>, CoreError> {
    let est = estimate_s_f(ansatz, params_final, &config.backend)?;
    let sinv_f = pinv_apply(&est, config.diag_shift, config.svd_cutoff, &est.f)?;
    Ok(sinv_f.iter().map(|z| Complex64::new(0.0, -1.0) * z).collect())
}

/// Observables of an RBM state under the exact or sampled backend.
#[derive(Debug, Clone)]
pub struct RbmObservables {
    /// `C^zz_d` for `d = 0 ..= N/2`, translation averaged.
    pub czz: Vec<f64>,
    pub energy: Complex64,
    pub energy_variance: f64,
    pub sigma_x: f64,
}

/// Measure correlators, energy and ⟨σ^x⟩ for the current parameters.
pub fn measure(
    ansatz: &Ansatz,
    params: &IsingParams,
    backend: &EstimatorBackend,
) -> Result<RbmObservables, CoreError> {
    match backend {
        EstimatorBackend::Exact => {
            let ctx = EstimatorContext::new(ansatz)?;
            measure_exact(ansatz, params, &ctx)
        }
        EstimatorBackend::Sampled(cfg) => measure_sampled(ansatz, params, cfg),
    }
}

fn czz_row_of_index(idx: usize, n: usize, dmax: usize, out: &mut [f64]) {
    for (d, o) in out.iter_mut().enumerate().take(dmax + 1) {
        let mut corr = 0.0;
        for i in 0..n {
            let si = if idx >> i & 1 == 0 { 1.0 } else { -1.0 };
            let j = (i + d) % n;
            let sj = if idx >> j & 1 == 0 { 1.0 } else { -1.0 };
            corr += si * sj;
        }
        *o = corr / n as f64;
    }
}

pub(crate) fn measure_exact(
    ansatz: &Ansatz,
    params: &IsingParams,
    ctx: &EstimatorContext,
) -> Result<RbmObservables, CoreError> {
    let dense = ansatz.dense();
    let n = ctx.n;
    let dmax = n / 2;
    let members = ctx.members();

    let mut scratch = EstimatorScratch::new(dense.m);
    let mut log_amps = vec![Complex64::new(0.0, 0.0); members];
    for (member, slot) in log_amps.iter_mut().enumerate() {
        *slot = theta_tanh_logamp(&dense, ctx.index_of(member), &mut scratch);
    }
    let max_re = log_amps.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = log_amps
        .iter()
        .enumerate()
        .map(|(member, z)| ctx.multiplicity(member) * (2.0 * (z.re - max_re)).exp())
        .collect();
    let norm: f64 = probs.iter().sum();
    for w in &mut probs {
        *w /= norm;
    }

    let mut czz = vec![0.0; dmax + 1];
    let mut row = vec![0.0; dmax + 1];
    let mut energy = Complex64::new(0.0, 0.0);
    let mut sq = 0.0;
    let mut sx = 0.0;
    for member in 0..members {
        let idx = ctx.index_of(member);
        let w = probs[member];
        czz_row_of_index(idx, n, dmax, &mut row);
        for (acc, r) in czz.iter_mut().zip(&row) {
            *acc += w * r;
        }
        let mut e = Complex64::new(diagonal_energy_index(params, idx), 0.0);
        let mut x = 0.0;
        for i in 0..n {
            let ratio = (log_amps[ctx.member_of_index(idx ^ (1 << i))] - log_amps[member]).exp();
            e += -params.h_x * ratio;
            x += ratio.re;
        }
        energy += w * e;
        sq += w * e.norm_sqr();
        sx += w * x / n as f64;
    }
    let energy_variance = (sq - energy.norm_sqr()).max(0.0);
    Ok(RbmObservables { czz, energy, energy_variance, sigma_x: sx })
}

fn measure_sampled(
    ansatz: &Ansatz,
    params: &IsingParams,
    cfg: &MetropolisConfig,
) -> Result<RbmObservables, CoreError> {
    let dense = ansatz.dense();
    let n = dense.n;
    let dmax = n / 2;
    let run = rbm::sample_metropolis(&dense, cfg);
    let count = run.samples.len() as f64;
    let mut czz = vec![0.0; dmax + 1];
    let mut row = vec![0.0; dmax + 1];
    let mut energy = Complex64::new(0.0, 0.0);
    let mut sq = 0.0;
    let mut sx = 0.0;
    for v in &run.samples {
        czz_row_of_index(v.to_index(), n, dmax, &mut row);
        for (acc, r) in czz.iter_mut().zip(&row) {
            *acc += r / count;
        }
        let table = LookupTable::new(&dense, v.clone());
        let e = rbm::local_energy_with_table(&dense, params, &table);
        energy += e / count;
        sq += e.norm_sqr() / count;
        let mut x = 0.0;
        for i in 0..n {
            x += table.ratio_flip(&dense, i).re;
        }
        sx += x / n as f64 / count;
    }
    Ok(RbmObservables {
        czz,
        energy,
        energy_variance: (sq - energy.norm_sqr()).max(0.0),
        sigma_x: sx,
    })
}

/// One observation row of a tVMC run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TvmcSample {
    pub time: f64,
    pub energy_re: f64,
    pub energy_im: f64,
    pub variance: f64,
    pub lambda: f64,
    pub czz: Vec<f64>,
    pub param_norm_inf: f64,
    pub param_norm_l2: f64,
}

/// Completed tVMC run: correlation series plus per-observation diagnostics
/// and the final parameters.
#[derive(Debug, Clone)]
pub struct TvmcRun {
    pub series: CorrelationSeries,
    pub samples: Vec<TvmcSample>,
    pub final_ansatz: Ansatz,
}

/// Integrate the parameter flow after a quench, starting from `state0`
/// (typically a converged ground state of the pre-quench parameters), and
/// record observables on the protocol's time grid. Grid times must be
/// integer multiples of `config.dt`.
///
/// Aborts with [`CoreError::Diverged`] when any parameter magnitude passes
/// 1e3 or (exact backend) the energy per site drifts by more than 1e-2.
pub fn evolve_tvmc(
    state0: &Ansatz,
    protocol: &QuenchProtocol,
    config: &TvmcConfig,
) -> Result<TvmcRun, CoreError> {
    protocol.validate()?;
    config.validate()?;
    let params_f = protocol.final_params;
    if state0.n() != params_f.n {
        return Err(CoreError::InvalidParams("ansatz and protocol sizes differ".into()));
    }
    let exact_backend = matches!(config.backend, EstimatorBackend::Exact);
    let ctx = if exact_backend { Some(EstimatorContext::new(state0)?) } else { None };

    // observation times must land on integration steps
    let mut obs_steps = Vec::with_capacity(protocol.times.len());
    for &t in &protocol.times {
        let steps = t / config.dt;
        if (steps - steps.round()).abs() > 1e-6 {
            return Err(CoreError::InvalidParams(format!(
                "observation time {t} is not a multiple of dt = {}",
                config.dt
            )));
        }
        obs_steps.push(steps.round() as usize);
    }

    let mut ansatz = state0.clone();
    let mut params = ansatz.pack();
    let p = params.len();

    let rhs_evals = std::cell::Cell::new(0u64);
    let rhs = |ansatz_buf: &mut Ansatz, w: &[Complex64]| -> Result<Vec<Complex64>, CoreError> {
        ansatz_buf.unpack(w)?;
        let est = match (&config.backend, &ctx) {
            (EstimatorBackend::Exact, Some(ctx)) => estimate_exact(ansatz_buf, &params_f, ctx)?,
            (EstimatorBackend::Sampled(cfg), _) => {
                // fresh, deterministic chain per stage evaluation
                let mut cfg = cfg.clone();
                cfg.seed = cfg.seed.wrapping_add(rhs_evals.get());
                rhs_evals.set(rhs_evals.get() + 1);
                estimate_sampled(ansatz_buf, &params_f, &cfg)?
            }
            _ => unreachable!(),
        };
        let sinv_f = pinv_apply(&est, config.diag_shift, config.svd_cutoff, &est.f)?;
        Ok(sinv_f.iter().map(|z| Complex64::new(0.0, -1.0) * z).collect())
    };

    let measure_now = |ansatz_buf: &mut Ansatz, w: &[Complex64]| -> Result<RbmObservables, CoreError> {
        ansatz_buf.unpack(w)?;
        match (&config.backend, &ctx) {
            (EstimatorBackend::Exact, Some(ctx)) => measure_exact(ansatz_buf, &params_f, ctx),
            (EstimatorBackend::Sampled(cfg), _) => measure_sampled(ansatz_buf, &params_f, cfg),
            _ => unreachable!(),
        }
    };

    let mut samples: Vec<TvmcSample> = Vec::with_capacity(protocol.times.len());
    let mut e0_per_site: Option<f64> = None;
    let total_steps = *obs_steps.last().unwrap();
    let mut next_obs = 0usize;

    let mut k1;
    let mut stage = vec![Complex64::new(0.0, 0.0); p];
    for step in 0..=total_steps {
        let t = step as f64 * config.dt;
        // record observables when this step is on the grid
        while next_obs < obs_steps.len() && obs_steps[next_obs] == step {
            let obs = measure_now(&mut ansatz, &params)?;
            let e_site = obs.energy.re / params_f.n as f64;
            match e0_per_site {
                None => e0_per_site = Some(e_site),
                Some(e0) if exact_backend => {
                    if (e_site - e0).abs() > 10.0 * 1e-3 {
                        return Err(CoreError::Diverged {
                            t,
                            reason: format!(
                                "energy per site drifted by {:.3e} (bound 1e-3, abort at 1e-2)",
                                (e_site - e0).abs()
                            ),
                        });
                    }
                }
                _ => {}
            }
            let norm_inf = params.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let norm_l2 = params.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            samples.push(TvmcSample {
                time: t,
                energy_re: obs.energy.re,
                energy_im: obs.energy.im,
                variance: obs.energy_variance,
                lambda: config.diag_shift,
                czz: obs.czz,
                param_norm_inf: norm_inf,
                param_norm_l2: norm_l2,
            });
            next_obs += 1;
        }
        if step == total_steps {
            break;
        }

        // classical RK4; numerical breakdowns inside a step are divergences
        let wrap = |e: CoreError, t: f64| match e {
            CoreError::RankZero | CoreError::SingularSystem(_) | CoreError::Eigen(_) => {
                CoreError::Diverged { t, reason: e.to_string() }
            }
            other => other,
        };
        k1 = rhs(&mut ansatz, &params).map_err(|e| wrap(e, t))?;
        for i in 0..p {
            stage[i] = params[i] + 0.5 * config.dt * k1[i];
        }
        let k2 = rhs(&mut ansatz, &stage).map_err(|e| wrap(e, t))?;
        for i in 0..p {
            stage[i] = params[i] + 0.5 * config.dt * k2[i];
        }
        let k3 = rhs(&mut ansatz, &stage).map_err(|e| wrap(e, t))?;
        for i in 0..p {
            stage[i] = params[i] + config.dt * k3[i];
        }
        let k4 = rhs(&mut ansatz, &stage).map_err(|e| wrap(e, t))?;
        for i in 0..p {
            params[i] += config.dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }

        let worst = params.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !worst.is_finite() || worst > 1e3 {
            return Err(CoreError::Diverged {
                t: t + config.dt,
                reason: format!("parameter magnitude reached {worst:.3e}"),
            });
        }
    }

    ansatz.unpack(&params)?;
    let times: Vec<f64> = samples.iter().map(|s| s.time).collect();
    let values: Vec<Vec<f64>> = samples.iter().map(|s| s.czz.clone()).collect();
    let provenance = format!(
        "rbm-{}-alpha{}-{}",
        if state0.is_symmetric() { "sym" } else { "full" },
        state0.alpha(),
        if exact_backend { "exact" } else { "sampled" },
    );
    let series = CorrelationSeries::new(times, values, None, provenance)?;
    Ok(TvmcRun { series, samples, final_ansatz: ansatz })
}
