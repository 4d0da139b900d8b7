//! Restricted-Boltzmann-machine wavefunction over σ^z configurations:
//!
//! ```text
//! c_v = exp(Σ_i a_i v_i) Π_j 2 cosh(b_j + Σ_i v_i W_{i,j})
//! ```
//!
//! with complex biases and weights and hidden variables in `{-1, +1}` (the
//! hidden sum is already performed in the `2 cosh` closed form). Provides
//! amplitude evaluation, O(M) flip ratios through a cached lookup table,
//! local energies, variational derivatives, a translation-symmetrized
//! parameterization, and exact-enumeration plus Metropolis sampling backends.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::exact::DENSE_LIMIT;
use crate::spin::{diagonal_energy, IsingParams, SpinConfig};

const LN_2: f64 = std::f64::consts::LN_2;

/// Overflow-safe `ln cosh z` for complex arguments.
///
/// `cosh` itself overflows once `|Re z|` exceeds ~710; this uses
/// `ln cosh z = |Re|-side z - ln 2 + ln(1 + e^{-2z'})` where `z'` has
/// non-negative real part, so the inner exponential never exceeds 1 in
/// magnitude and the principal logarithm stays on its branch.
pub fn ln_cosh(z: Complex64) -> Complex64 {
    let w = if z.re < 0.0 { -z } else { z };
    w - LN_2 + (1.0 + (-2.0 * w).exp()).ln()
}

/// `tanh z` computed from `e^{-2|Re|-side z}` so large arguments saturate
/// cleanly instead of overflowing.
pub fn tanh_stable(z: Complex64) -> Complex64 {
    let s = if z.re < 0.0 { -1.0 } else { 1.0 };
    let e = (-2.0 * s * z).exp();
    s * (1.0 - e) / (1.0 + e)
}

/// Both [`ln_cosh`] and [`tanh_stable`] from one shared exponential; the hot
/// estimator loops need both per hidden unit.
pub(crate) fn ln_cosh_tanh(z: Complex64) -> (Complex64, Complex64) {
    let s = if z.re < 0.0 { -1.0 } else { 1.0 };
    let w = s * z;
    let e = (-2.0 * w).exp();
    ((w - LN_2) + (1.0 + e).ln(), s * (1.0 - e) / (1.0 + e))
}

/// Dense RBM parameters: `N` visible biases, `M` hidden biases, and the
/// `N × M` weight matrix (row-major, `w[i*m + j] = W_{i,j}`).
#[derive(Debug, Clone, PartialEq)]
pub struct RbmState {
    pub n: usize,
    pub m: usize,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub w: Vec<Complex64>,
}

impl RbmState {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            a: vec![Complex64::new(0.0, 0.0); n],
            b: vec![Complex64::new(0.0, 0.0); m],
            w: vec![Complex64::new(0.0, 0.0); n * m],
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.a.len() != self.n || self.b.len() != self.m || self.w.len() != self.n * self.m {
            return Err(CoreError::InvalidParams("RBM shape mismatch".into()));
        }
        let finite = self.a.iter().chain(&self.b).chain(&self.w).all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite {
            return Err(CoreError::InvalidParams("non-finite RBM parameter".into()));
        }
        Ok(())
    }

    /// Effective angles θ_j(v) = b_j + Σ_i v_i W_{i,j}.
    pub fn theta(&self, v: &SpinConfig) -> Vec<Complex64> {
        let mut th = self.b.clone();
        for i in 0..self.n {
            let vi = v.spin(i);
            let row = &self.w[i * self.m..(i + 1) * self.m];
            for (t, wij) in th.iter_mut().zip(row) {
                *t += vi * wij;
            }
        }
        th
    }

    /// Number of independent parameters, `N + M + N·M`.
    pub fn param_count(&self) -> usize {
        self.n + self.m + self.n * self.m
    }
}

/// Translation-invariant RBM: one visible bias, one hidden bias per filter,
/// and `α` length-`N` filters. Expands to a dense [`RbmState`] with
/// `M = α N` hidden units whose weights are cyclic shifts of the filters,
/// collapsing `M + N + MN` parameters to `M + M/N + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationInvariantRbm {
    pub n: usize,
    pub alpha: usize,
    pub a: Complex64,
    /// One bias per filter.
    pub b: Vec<Complex64>,
    /// Filter `f` occupies `filters[f*n .. (f+1)*n]`.
    pub filters: Vec<Complex64>,
}

impl TranslationInvariantRbm {
    pub fn zeros(n: usize, alpha: usize) -> Self {
        Self {
            n,
            alpha,
            a: Complex64::new(0.0, 0.0),
            b: vec![Complex64::new(0.0, 0.0); alpha],
            filters: vec![Complex64::new(0.0, 0.0); alpha * n],
        }
    }

    pub fn param_count(&self) -> usize {
        1 + self.alpha + self.alpha * self.n
    }

    /// Dense expansion: hidden unit `(f, d)` sits at column `j = f·N + d`
    /// with `W_{i,(f,d)} = filter_f((i - d) mod N)` and bias `b_f`, so a
    /// cyclic shift of the visible spins permutes the hidden units.
    pub fn expand(&self) -> RbmState {
        let n = self.n;
        let m = self.alpha * n;
        let mut dense = RbmState::zeros(n, m);
        dense.a.fill(self.a);
        for f in 0..self.alpha {
            for d in 0..n {
                dense.b[f * n + d] = self.b[f];
                for i in 0..n {
                    dense.w[i * m + f * n + d] = self.filters[f * n + (i + n - d) % n];
                }
            }
        }
        dense
    }
}

/// Either parameterization, presented to the engines through one interface.
#[derive(Debug, Clone, PartialEq)]
pub enum Ansatz {
    Full(RbmState),
    Symmetric(TranslationInvariantRbm),
}

impl Ansatz {
    /// Gaussian random initialization (independent real and imaginary parts
    /// of width `sigma`), deterministic under `seed`.
    pub fn random(n: usize, alpha: usize, symmetric: bool, sigma: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| {
            // Box-Muller from uniform draws keeps us independent of external
            // distribution crates.
            let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
            let u2: f64 = rng.gen::<f64>();
            let r = (-2.0 * u1.ln()).sqrt() * sigma;
            let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
            Complex64::new(r * c, r * s)
        };
        if symmetric {
            let mut s = TranslationInvariantRbm::zeros(n, alpha);
            s.a = draw(&mut rng);
            for b in &mut s.b {
                *b = draw(&mut rng);
            }
            for w in &mut s.filters {
                *w = draw(&mut rng);
            }
            Ansatz::Symmetric(s)
        } else {
            let mut f = RbmState::zeros(n, alpha * n);
            for a in &mut f.a {
                *a = draw(&mut rng);
            }
            for b in &mut f.b {
                *b = draw(&mut rng);
            }
            for w in &mut f.w {
                *w = draw(&mut rng);
            }
            Ansatz::Full(f)
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Ansatz::Full(s) => s.n,
            Ansatz::Symmetric(s) => s.n,
        }
    }

    pub fn hidden_count(&self) -> usize {
        match self {
            Ansatz::Full(s) => s.m,
            Ansatz::Symmetric(s) => s.alpha * s.n,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        matches!(self, Ansatz::Symmetric(_))
    }

    pub fn alpha(&self) -> usize {
        match self {
            Ansatz::Full(s) => s.m / s.n,
            Ansatz::Symmetric(s) => s.alpha,
        }
    }

    /// Independent parameter count (length of the packed vector).
    pub fn param_count(&self) -> usize {
        match self {
            Ansatz::Full(s) => s.param_count(),
            Ansatz::Symmetric(s) => s.param_count(),
        }
    }

    /// Dense view used by samplers and amplitude evaluation.
    pub fn dense(&self) -> RbmState {
        match self {
            Ansatz::Full(s) => s.clone(),
            Ansatz::Symmetric(s) => s.expand(),
        }
    }

    /// Flatten into the canonical parameter order:
    /// full `(a…, b…, W_{0,0}, W_{0,1}, …)` row-major in the site index;
    /// symmetric `(a, b_f…, filter_0…, filter_{α-1}…)`.
    pub fn pack(&self) -> Vec<Complex64> {
        match self {
            Ansatz::Full(s) => {
                let mut out = Vec::with_capacity(s.param_count());
                out.extend_from_slice(&s.a);
                out.extend_from_slice(&s.b);
                out.extend_from_slice(&s.w);
                out
            }
            Ansatz::Symmetric(s) => {
                let mut out = Vec::with_capacity(s.param_count());
                out.push(s.a);
                out.extend_from_slice(&s.b);
                out.extend_from_slice(&s.filters);
                out
            }
        }
    }

    /// Inverse of [`Ansatz::pack`]; shapes come from `self`.
    pub fn unpack(&mut self, params: &[Complex64]) -> Result<(), CoreError> {
        if params.len() != self.param_count() {
            return Err(CoreError::InvalidParams(format!(
                "expected {} packed parameters, got {}",
                self.param_count(),
                params.len()
            )));
        }
        match self {
            Ansatz::Full(s) => {
                s.a.copy_from_slice(&params[..s.n]);
                s.b.copy_from_slice(&params[s.n..s.n + s.m]);
                s.w.copy_from_slice(&params[s.n + s.m..]);
            }
            Ansatz::Symmetric(s) => {
                s.a = params[0];
                s.b.copy_from_slice(&params[1..1 + s.alpha]);
                s.filters.copy_from_slice(&params[1 + s.alpha..]);
            }
        }
        Ok(())
    }

    /// Variational log-derivatives `O_k(v) = ∂_{W_k} ln c_v` in packed order,
    /// written into `out`, given `tanh θ_j` for the dense hidden units.
    ///
    /// Full: `O_{a_i} = v_i`, `O_{b_j} = tanh θ_j`, `O_{W_ij} = v_i tanh θ_j`.
    /// Symmetric parameters are the corresponding sums over shifts `d`.
    pub fn derivatives_from_tanh(&self, v: &SpinConfig, tanh_theta: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(out.len(), self.param_count());
        match self {
            Ansatz::Full(s) => {
                for i in 0..s.n {
                    out[i] = Complex64::new(v.spin(i), 0.0);
                }
                out[s.n..s.n + s.m].copy_from_slice(tanh_theta);
                for i in 0..s.n {
                    let vi = v.spin(i);
                    let dst = &mut out[s.n + s.m + i * s.m..s.n + s.m + (i + 1) * s.m];
                    for (o, t) in dst.iter_mut().zip(tanh_theta) {
                        *o = vi * t;
                    }
                }
            }
            Ansatz::Symmetric(s) => {
                let n = s.n;
                // doubled spin table removes the ring modulo from the inner loop
                let mut vs = vec![0.0f64; 2 * n];
                let mut vsum = 0.0;
                for i in 0..n {
                    let si = v.spin(i);
                    vs[i] = si;
                    vs[i + n] = si;
                    vsum += si;
                }
                out[0] = Complex64::new(vsum, 0.0);
                for f in 0..s.alpha {
                    let th = &tanh_theta[f * n..(f + 1) * n];
                    out[1 + f] = th.iter().sum();
                    let dst = &mut out[1 + s.alpha + f * n..1 + s.alpha + (f + 1) * n];
                    dst.fill(Complex64::new(0.0, 0.0));
                    // O_{w_f(r)} = Σ_d v_{r+d} tanh θ_{f,d}
                    for (d, &t) in th.iter().enumerate() {
                        for (o, &vv) in dst.iter_mut().zip(&vs[d..d + n]) {
                            *o += vv * t;
                        }
                    }
                }
            }
        }
    }

    /// Convenience wrapper computing θ from scratch.
    pub fn variational_derivatives(&self, v: &SpinConfig) -> Vec<Complex64> {
        let dense = self.dense();
        let tanh: Vec<Complex64> = dense.theta(v).iter().map(|&t| tanh_stable(t)).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); self.param_count()];
        self.derivatives_from_tanh(v, &tanh, &mut out);
        out
    }
}

/// `ln c_v` with the overflow-safe hidden-unit sum.
pub fn log_amplitude(state: &RbmState, v: &SpinConfig) -> Complex64 {
    debug_assert_eq!(v.len(), state.n);
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..state.n {
        acc += v.spin(i) * state.a[i];
    }
    for th in state.theta(v) {
        acc += LN_2 + ln_cosh(th);
    }
    acc
}

/// Cached effective angles for one sampler chain. All single-flip queries and
/// updates are O(M).
#[derive(Debug, Clone)]
pub struct LookupTable {
    pub v: SpinConfig,
    theta: Vec<Complex64>,
}

impl LookupTable {
    pub fn new(state: &RbmState, v: SpinConfig) -> Self {
        let theta = state.theta(&v);
        Self { v, theta }
    }

    pub fn theta(&self) -> &[Complex64] {
        &self.theta
    }

    /// `ln (c_ṽ / c_v)` for the single flip of `site`.
    pub fn log_ratio_flip(&self, state: &RbmState, site: usize) -> Complex64 {
        let vi = self.v.spin(site);
        let mut acc = -2.0 * vi * state.a[site];
        let row = &state.w[site * state.m..(site + 1) * state.m];
        for (th, wij) in self.theta.iter().zip(row) {
            acc += ln_cosh(th - 2.0 * vi * wij) - ln_cosh(*th);
        }
        acc
    }

    /// `c_ṽ / c_v` for the single flip of `site`.
    pub fn ratio_flip(&self, state: &RbmState, site: usize) -> Complex64 {
        self.log_ratio_flip(state, site).exp()
    }

    /// Commit the flip of `site`, updating the cached angles incrementally.
    pub fn accept_flip(&mut self, state: &RbmState, site: usize) {
        let vi = self.v.spin(site);
        let row = &state.w[site * state.m..(site + 1) * state.m];
        for (th, wij) in self.theta.iter_mut().zip(row) {
            *th -= 2.0 * vi * wij;
        }
        self.v.flip(site);
    }

    /// Compare the cached angles against a fresh recomputation.
    pub fn validate(&self, state: &RbmState) -> Result<(), CoreError> {
        let fresh = state.theta(&self.v);
        let defect = self
            .theta
            .iter()
            .zip(&fresh)
            .map(|(c, f)| (c - f).norm())
            .fold(0.0, f64::max);
        if defect > 1e-10 {
            return Err(CoreError::StaleCache(defect));
        }
        Ok(())
    }
}

/// Local energy `E_loc(v) = ⟨v|H|Ψ⟩ / c_v`, evaluated from the diagonal term
/// plus `-h_x` times the N single-flip amplitude ratios.
pub fn local_energy_with_table(state: &RbmState, params: &IsingParams, table: &LookupTable) -> Complex64 {
    let mut acc = Complex64::new(diagonal_energy(params, &table.v), 0.0);
    if params.h_x != 0.0 {
        for i in 0..state.n {
            acc += -params.h_x * table.ratio_flip(state, i);
        }
    }
    acc
}

pub fn local_energy(state: &RbmState, params: &IsingParams, v: &SpinConfig) -> Complex64 {
    let table = LookupTable::new(state, v.clone());
    local_energy_with_table(state, params, &table)
}

/// Chain configuration for [`sample_metropolis`]. `burn_in` and `thinning`
/// count proposals; the defaults decorrelate at the sweep scale.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MetropolisConfig {
    pub n_samples: usize,
    /// Proposals discarded before recording; default `1000 N`.
    pub burn_in: Option<usize>,
    /// Proposals between recorded samples; default `N` (one sweep).
    pub thinning: Option<usize>,
    pub seed: u64,
}

impl MetropolisConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self { n_samples, burn_in: None, thinning: None, seed }
    }
}

/// Metropolis sampling output: the recorded configurations plus chain
/// statistics.
#[derive(Debug, Clone)]
pub struct SampleRun {
    pub samples: Vec<SpinConfig>,
    pub proposals: usize,
    pub accepted: usize,
}

impl SampleRun {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }
}

/// Single-spin-flip Metropolis chain on `|c_v|²`: a uniformly random site is
/// proposed and accepted with probability `min(1, |c_ṽ/c_v|²)`. Deterministic
/// under its seed.
pub fn sample_metropolis(state: &RbmState, config: &MetropolisConfig) -> SampleRun {
    assert!(config.n_samples >= 1);
    let n = state.n;
    let burn_in = config.burn_in.unwrap_or(1000 * n);
    let thinning = config.thinning.unwrap_or(n).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let start = SpinConfig::new((0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect()).unwrap();
    let mut table = LookupTable::new(state, start);
    let mut samples = Vec::with_capacity(config.n_samples);
    let mut proposals = 0usize;
    let mut accepted = 0usize;
    let mut since_emit = 0usize;

    let total = burn_in + config.n_samples * thinning;
    while samples.len() < config.n_samples {
        let site = rng.gen_range(0..n);
        let log_ratio = table.log_ratio_flip(state, site);
        // |ratio|² = exp(2 Re ln ratio); acceptance min(1, ·)
        let accept = 2.0 * log_ratio.re >= 0.0 || rng.gen::<f64>() < (2.0 * log_ratio.re).exp();
        if accept {
            table.accept_flip(state, site);
            accepted += 1;
            #[cfg(debug_assertions)]
            if accepted % 4096 == 0 {
                table.validate(state).expect("lookup table drifted");
            }
        }
        proposals += 1;
        if proposals > burn_in {
            since_emit += 1;
            if since_emit == thinning {
                samples.push(table.v.clone());
                since_emit = 0;
            }
        }
    }
    debug_assert!(proposals <= total);
    SampleRun { samples, proposals, accepted }
}

/// The full amplitude table over all 2^N configurations, with normalized
/// probabilities; expectation values taken from this backend carry no
/// sampling noise.
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    pub n: usize,
    pub log_amps: Vec<Complex64>,
    /// `|c_v|² / Σ|c|²`, computed with a max-log shift for stability.
    pub probs: Vec<f64>,
}

pub fn enumerate_exact(state: &RbmState) -> Result<ExactDistribution, CoreError> {
    if state.n > DENSE_LIMIT {
        return Err(CoreError::SizeLimit { n: state.n, limit: DENSE_LIMIT });
    }
    let dim = 1usize << state.n;
    let log_amps: Vec<Complex64> = (0..dim)
        .map(|idx| log_amplitude(state, &SpinConfig::from_index(idx, state.n)))
        .collect();
    let probs = probabilities_from_logs(&log_amps);
    Ok(ExactDistribution { n: state.n, log_amps, probs })
}

/// Normalize `|c|² = exp(2 Re ln c)` against the largest log magnitude.
pub(crate) fn probabilities_from_logs(log_amps: &[Complex64]) -> Vec<f64> {
    let max_re = log_amps.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = log_amps.iter().map(|z| (2.0 * (z.re - max_re)).exp()).collect();
    let norm: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= norm;
    }
    probs
}

/// Versioned on-disk snapshot of an [`Ansatz`]; real and imaginary parts are
/// stored as separate JSON arrays so the decimal round-trip is exact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Snapshot {
    pub version: u32,
    pub n: usize,
    pub m: usize,
    pub alpha: usize,
    pub symmetric: bool,
    pub params_re: Vec<f64>,
    pub params_im: Vec<f64>,
}

pub const SNAPSHOT_VERSION: u32 = 1;

impl Snapshot {
    pub fn from_ansatz(ansatz: &Ansatz) -> Self {
        let packed = ansatz.pack();
        Self {
            version: SNAPSHOT_VERSION,
            n: ansatz.n(),
            m: ansatz.hidden_count(),
            alpha: ansatz.alpha(),
            symmetric: ansatz.is_symmetric(),
            params_re: packed.iter().map(|z| z.re).collect(),
            params_im: packed.iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_ansatz(&self) -> Result<Ansatz, CoreError> {
        if self.version != SNAPSHOT_VERSION {
            return Err(CoreError::Snapshot(format!("unsupported snapshot version {}", self.version)));
        }
        if self.params_re.len() != self.params_im.len() {
            return Err(CoreError::Snapshot("re/im arrays differ in length".into()));
        }
        let params: Vec<Complex64> = self
            .params_re
            .iter()
            .zip(&self.params_im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        let mut ansatz = if self.symmetric {
            Ansatz::Symmetric(TranslationInvariantRbm::zeros(self.n, self.alpha))
        } else {
            Ansatz::Full(RbmState::zeros(self.n, self.m))
        };
        ansatz.unpack(&params)?;
        Ok(ansatz)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), CoreError> {
        let body = serde_json::to_string_pretty(self).map_err(|e| CoreError::Snapshot(e.to_string()))?;
        std::fs::write(path, body).map_err(|e| CoreError::Snapshot(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CoreError> {
        let body = std::fs::read_to_string(path).map_err(|e| CoreError::Snapshot(e.to_string()))?;
        serde_json::from_str(&body).map_err(|e| CoreError::Snapshot(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_state(n: usize, m: usize, sigma: f64, seed: u64) -> RbmState {
        match Ansatz::random(n, m / n, false, sigma, seed) {
            Ansatz::Full(mut s) => {
                // allow m not a multiple of n in tests by regenerating shapes
                if s.m != m {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let draw = |rng: &mut ChaCha8Rng| {
                        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                        let u2: f64 = rng.gen::<f64>();
                        let r = (-2.0 * u1.ln()).sqrt() * sigma;
                        let (sn, cs) = (2.0 * std::f64::consts::PI * u2).sin_cos();
                        Complex64::new(r * cs, r * sn)
                    };
                    s = RbmState::zeros(n, m);
                    for z in s.a.iter_mut().chain(s.b.iter_mut()).chain(s.w.iter_mut()) {
                        *z = draw(&mut rng);
                    }
                }
                s
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn stable_functions_match_naive_in_safe_range() {
        let pts = [
            Complex64::new(0.3, -0.8),
            Complex64::new(-2.0, 1.4),
            Complex64::new(5.0, 0.1),
            Complex64::new(0.0, 0.4),
        ];
        for z in pts {
            assert!((ln_cosh(z).exp() - z.cosh()).norm() < 1e-12 * z.cosh().norm());
            assert!((tanh_stable(z) - z.tanh()).norm() < 1e-12);
        }
        // huge argument: naive cosh overflows, the stable one does not
        for z in pts {
            let (lc, th) = ln_cosh_tanh(z);
            assert!((lc - ln_cosh(z)).norm() < 1e-15);
            assert!((th - tanh_stable(z)).norm() < 1e-15);
        }
        let big = Complex64::new(1000.0, 0.7);
        let lc = ln_cosh(big);
        assert!(lc.re.is_finite());
        assert!((lc.re - (1000.0 - LN_2)).abs() < 1e-9);
        assert!((tanh_stable(big).re - 1.0).abs() < 1e-12);
        assert!((tanh_stable(-big).re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_parameters_give_uniform_state() {
        let s = RbmState::zeros(6, 12);
        let expect = 12.0 * LN_2;
        for idx in 0..64 {
            let la = log_amplitude(&s, &SpinConfig::from_index(idx, 6));
            assert!((la - Complex64::new(expect, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn bias_only_state_is_a_product_state() {
        let mut s = RbmState::zeros(4, 4);
        let beta = Complex64::new(0.3, -0.2);
        let target = [1.0, -1.0, -1.0, 1.0];
        for (ai, t) in s.a.iter_mut().zip(target) {
            *ai = beta * t;
        }
        let v = SpinConfig::new(vec![1, 1, -1, -1]).unwrap();
        let vp = SpinConfig::new(vec![1, -1, -1, 1]).unwrap();
        let ratio = (log_amplitude(&s, &v) - log_amplitude(&s, &vp)).exp();
        // ln c_v - ln c_v' = β Σ (v - v') t
        let mut exponent = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            exponent += beta * (v.spin(i) - vp.spin(i)) * target[i];
        }
        assert!((ratio - exponent.exp()).norm() < 1e-12);
    }

    #[test]
    fn log_amplitude_matches_brute_force_hidden_sum() {
        // Independent oracle: sum Eq.-style over all 2^M hidden configurations.
        let n = 6;
        let m = 9;
        let state = random_state(n, m, 0.17, 42);
        for idx in [0usize, 7, 21, 63] {
            let v = SpinConfig::from_index(idx, n);
            let mut brute = Complex64::new(0.0, 0.0);
            for h in 0..1usize << m {
                let mut ex = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    ex += state.a[i] * v.spin(i);
                }
                for j in 0..m {
                    let hj = if h >> j & 1 == 0 { 1.0 } else { -1.0 };
                    ex += state.b[j] * hj;
                    for i in 0..n {
                        ex += v.spin(i) * state.w[i * m + j] * hj;
                    }
                }
                brute += ex.exp();
            }
            let closed = log_amplitude(&state, &v).exp();
            assert!(
                (closed - brute).norm() < 1e-9 * brute.norm(),
                "closed {closed} vs brute {brute}"
            );
        }
    }

    #[test]
    fn ratio_flip_matches_scratch_and_inverts() {
        let n = 7;
        let state = random_state(n, 2 * n, 0.3, 7);
        let v = SpinConfig::from_index(0b1011001, n);
        let table = LookupTable::new(&state, v.clone());
        for site in 0..n {
            let ratio = table.ratio_flip(&state, site);
            let scratch = (log_amplitude(&state, &v.flipped(site)) - log_amplitude(&state, &v)).exp();
            assert!((ratio - scratch).norm() < 1e-10 * scratch.norm().max(1.0));
        }
        // flipping the same site twice multiplies to one
        let mut t = LookupTable::new(&state, v);
        let r1 = t.ratio_flip(&state, 3);
        t.accept_flip(&state, 3);
        let r2 = t.ratio_flip(&state, 3);
        t.accept_flip(&state, 3);
        assert!((r1 * r2 - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        t.validate(&state).unwrap();
    }

    #[test]
    fn lookup_table_stays_coherent_over_many_flips() {
        let n = 8;
        let state = random_state(n, 3 * n, 0.25, 3);
        let mut table = LookupTable::new(&state, SpinConfig::all_up(n));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5000 {
            table.accept_flip(&state, rng.gen_range(0..n));
        }
        table.validate(&state).unwrap();
    }

    #[test]
    fn local_energy_uniform_state_closed_form() {
        let n = 6;
        let state = RbmState::zeros(n, n);
        let params = IsingParams::new(n, 2.5, 0.4);
        for idx in [0usize, 5, 33] {
            let v = SpinConfig::from_index(idx, n);
            let e = local_energy(&state, &params, &v);
            let expect = diagonal_energy(&params, &v) - n as f64 * 2.5;
            assert!((e - Complex64::new(expect, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn local_energy_no_transverse_field_is_diagonal() {
        let n = 5;
        let state = random_state(n, n, 0.4, 9);
        let params = IsingParams::new(n, 0.0, 1.3);
        let v = SpinConfig::from_index(19, n);
        let e = local_energy(&state, &params, &v);
        assert_eq!(e.im, 0.0);
        assert_eq!(e.re, diagonal_energy(&params, &v));
    }

    #[test]
    fn derivatives_zero_parameters() {
        let ansatz = Ansatz::Full(RbmState::zeros(4, 8));
        let v = SpinConfig::new(vec![1, -1, 1, 1]).unwrap();
        let o = ansatz.variational_derivatives(&v);
        for i in 0..4 {
            assert_eq!(o[i], Complex64::new(v.spin(i), 0.0));
        }
        for j in 0..8 {
            assert_eq!(o[4 + j], Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        for (symmetric, seed) in [(false, 5u64), (true, 6u64)] {
            let ansatz = Ansatz::random(5, 2, symmetric, 0.2, seed);
            let v = SpinConfig::from_index(11, 5);
            let analytic = ansatz.variational_derivatives(&v);
            let packed = ansatz.pack();
            let h = 1e-5;
            for k in 0..ansatz.param_count() {
                let probe = |delta: Complex64| {
                    let mut p = packed.clone();
                    p[k] += delta;
                    let mut a = ansatz.clone();
                    a.unpack(&p).unwrap();
                    log_amplitude(&a.dense(), &v)
                };
                let dre = (probe(Complex64::new(h, 0.0)) - probe(Complex64::new(-h, 0.0))) / (2.0 * h);
                let dim = (probe(Complex64::new(0.0, h)) - probe(Complex64::new(0.0, -h))) / (2.0 * h);
                // holomorphic: d/dW = d/dRe = -i d/dIm
                let fd = (dre + dim / Complex64::new(0.0, 1.0)) / 2.0;
                let scale = analytic[k].norm().max(1.0);
                assert!(
                    (analytic[k] - fd).norm() < 1e-6 * scale,
                    "param {k} sym={symmetric}: {} vs {}",
                    analytic[k],
                    fd
                );
            }
        }
    }

    #[test]
    fn symmetric_state_shift_invariance() {
        let ansatz = Ansatz::random(8, 2, true, 0.3, 77);
        let dense = ansatz.dense();
        let v = SpinConfig::from_index(0b10110100, 8);
        let base = log_amplitude(&dense, &v);
        for d in 1..8 {
            let shifted = log_amplitude(&dense, &v.shifted(d));
            assert!(
                (shifted - base).norm() < 1e-12 * base.norm().max(1.0),
                "shift {d}: {shifted} vs {base}"
            );
        }
        // symmetrized derivatives are shift invariant as well
        let o1 = ansatz.variational_derivatives(&v);
        let o2 = ansatz.variational_derivatives(&v.shifted(3));
        for (x, y) in o1.iter().zip(&o2) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn symmetric_parameter_count_collapses() {
        let s = TranslationInvariantRbm::zeros(10, 4);
        let m = 40;
        assert_eq!(s.param_count(), m + m / 10 + 1);
        assert_eq!(s.expand().param_count(), m + 10 + m * 10);
    }

    #[test]
    fn pack_unpack_round_trip() {
        for symmetric in [false, true] {
            let ansatz = Ansatz::random(6, 3, symmetric, 0.2, 123);
            let packed = ansatz.pack();
            assert_eq!(packed.len(), ansatz.param_count());
            let mut other = Ansatz::random(6, 3, symmetric, 0.2, 999);
            other.unpack(&packed).unwrap();
            assert_eq!(other, ansatz);
        }
    }

    #[test]
    fn enumerate_uniform_and_normalized() {
        let state = RbmState::zeros(6, 6);
        let dist = enumerate_exact(&state).unwrap();
        let expect = 1.0 / 64.0;
        for p in &dist.probs {
            assert!((p - expect).abs() < 1e-12);
        }
        let state = random_state(6, 12, 0.3, 4);
        let dist = enumerate_exact(&state).unwrap();
        assert!((dist.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn metropolis_accepts_everything_on_uniform_state() {
        let state = RbmState::zeros(6, 6);
        let run = sample_metropolis(&state, &MetropolisConfig::new(500, 21));
        assert_eq!(run.accepted, run.proposals);
        assert_eq!(run.samples.len(), 500);
    }

    #[test]
    fn metropolis_deterministic_under_seed() {
        let state = random_state(6, 12, 0.3, 8);
        let a = sample_metropolis(&state, &MetropolisConfig::new(200, 5));
        let b = sample_metropolis(&state, &MetropolisConfig::new(200, 5));
        assert_eq!(a.samples, b.samples);
        let c = sample_metropolis(&state, &MetropolisConfig::new(200, 6));
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn metropolis_tracks_exact_distribution() {
        let n = 6;
        let state = random_state(n, 2 * n, 0.25, 31);
        let dist = enumerate_exact(&state).unwrap();
        let run = sample_metropolis(&state, &MetropolisConfig::new(200_000, 17));
        let mut counts = vec![0usize; 1 << n];
        for s in &run.samples {
            counts[s.to_index()] += 1;
        }
        let total = run.samples.len() as f64;
        let tv: f64 = counts
            .iter()
            .zip(&dist.probs)
            .map(|(&c, &p)| (c as f64 / total - p).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.05, "total variation {tv}");
        // sampled nearest-neighbor correlator within a few standard errors
        let czz_exact: f64 = dist
            .probs
            .iter()
            .enumerate()
            .map(|(idx, p)| {
                let v = SpinConfig::from_index(idx, n);
                p * (0..n).map(|i| v.spin(i) * v.spin((i + 1) % n)).sum::<f64>() / n as f64
            })
            .sum();
        let vals: Vec<f64> = run
            .samples
            .iter()
            .map(|v| (0..n).map(|i| v.spin(i) * v.spin((i + 1) % n)).sum::<f64>() / n as f64)
            .collect();
        let mean = vals.iter().sum::<f64>() / total;
        let var = vals.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / total;
        let stderr = (var / total).sqrt();
        assert!(
            (mean - czz_exact).abs() < 5.0 * stderr.max(1e-4),
            "sampled {mean} vs exact {czz_exact} (stderr {stderr})"
        );
    }

    #[test]
    fn sampler_satisfies_detailed_balance_empirically() {
        // record every post-proposal state (thinning = 1) and compare the
        // empirical flow a -> b against b -> a for the busiest pairs
        let n = 4;
        let state = random_state(n, 2 * n, 0.3, 19);
        let cfg = MetropolisConfig {
            n_samples: 400_000,
            burn_in: Some(2_000),
            thinning: Some(1),
            seed: 5,
        };
        let run = sample_metropolis(&state, &cfg);
        let mut flow = std::collections::HashMap::new();
        for pair in run.samples.windows(2) {
            let (a, b) = (pair[0].to_index(), pair[1].to_index());
            if a != b {
                *flow.entry((a, b)).or_insert(0usize) += 1;
            }
        }
        let mut checked = 0;
        for (&(a, b), &n_ab) in &flow {
            if a < b && n_ab > 2000 {
                let n_ba = flow.get(&(b, a)).copied().unwrap_or(0);
                let sigma = ((n_ab + n_ba) as f64).sqrt();
                let imbalance = (n_ab as f64 - n_ba as f64).abs();
                assert!(
                    imbalance < 5.0 * sigma,
                    "flow {a}->{b}: {n_ab} vs {n_ba} (5 sigma = {:.0})",
                    5.0 * sigma
                );
                checked += 1;
            }
        }
        assert!(checked >= 5, "too few busy pairs to check ({checked})");
    }

    #[test]
    fn snapshot_round_trip_is_exact() {
        let dir = std::env::temp_dir().join("quench-core-snapshot-test");
        std::fs::create_dir_all(&dir).unwrap();
        for symmetric in [false, true] {
            let ansatz = Ansatz::random(8, 2, symmetric, 0.37, 2024);
            let path = dir.join(format!("snap-{symmetric}.json"));
            Snapshot::from_ansatz(&ansatz).save(&path).unwrap();
            let loaded = Snapshot::load(&path).unwrap().to_ansatz().unwrap();
            // bit-exact decimal round trip
            assert_eq!(loaded.pack(), ansatz.pack());
        }
    }
}
