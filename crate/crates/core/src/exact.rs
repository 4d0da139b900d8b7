//! Dense exact diagonalization for chains up to `N = 14`: ground states,
//! quench evolution through the full spectral decomposition (no integration
//! error), spin-spin correlators, and half-chain entanglement entropy.
//!
//! In the σ^z basis the Hamiltonian matrix is real symmetric: the bond and
//! longitudinal terms are diagonal and the transverse term connects
//! single-spin flips with element `-h_x`.

use faer::Mat;
use num_complex::Complex64;

use crate::error::CoreError;
use crate::linalg;
use crate::spin::{diagonal_energy_index, IsingParams};

/// Hard cap for the dense solvers; 2^14 × 2^14 is the largest matrix we allow.
pub const DENSE_LIMIT: usize = 14;

/// Dense complex amplitude vector over the 2^N basis configurations.
#[derive(Debug, Clone)]
pub struct StateVector {
    pub n: usize,
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(n: usize, amplitudes: Vec<Complex64>) -> Result<Self, CoreError> {
        if amplitudes.len() != 1 << n {
            return Err(CoreError::InvalidParams(format!(
                "amplitude vector has length {}, expected 2^{n}",
                amplitudes.len()
            )));
        }
        Ok(Self { n, amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let nrm = self.norm();
        if nrm > 0.0 {
            for a in &mut self.amplitudes {
                *a /= nrm;
            }
        }
    }

    /// ⟨self|other⟩ with the physics convention (conjugate on `self`).
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Largest absolute amplitude difference, ignoring any global phase is
    /// *not* attempted here; callers align phases first if they need to.
    pub fn max_amplitude_diff(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn check_size(n: usize) -> Result<(), CoreError> {
    if n > DENSE_LIMIT {
        return Err(CoreError::SizeLimit { n, limit: DENSE_LIMIT });
    }
    Ok(())
}

/// Assemble the dense Hamiltonian of [`IsingParams`] (real symmetric,
/// 2^N × 2^N). Errors when `N` exceeds [`DENSE_LIMIT`].
pub fn build_hamiltonian(params: &IsingParams) -> Result<Mat<f64>, CoreError> {
    params.validate()?;
    check_size(params.n)?;
    let dim = 1usize << params.n;
    let mut h = Mat::<f64>::zeros(dim, dim);
    for idx in 0..dim {
        h[(idx, idx)] = diagonal_energy_index(params, idx);
        for i in 0..params.n {
            h[(idx ^ (1 << i), idx)] += -params.h_x;
        }
    }
    Ok(h)
}

/// Full eigendecomposition of a chain Hamiltonian.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub n: usize,
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns (real, since H is real symmetric).
    pub eigenvectors: Mat<f64>,
}

impl SpectralDecomposition {
    pub fn new(params: &IsingParams) -> Result<Self, CoreError> {
        let h = build_hamiltonian(params)?;
        let (eigenvalues, eigenvectors) = linalg::eigh_real(h.as_ref())?;
        Ok(Self { n: params.n, eigenvalues, eigenvectors })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Column `k` as a state vector.
    pub fn eigenstate(&self, k: usize) -> StateVector {
        let dim = self.dim();
        let amplitudes = (0..dim)
            .map(|x| Complex64::new(self.eigenvectors[(x, k)], 0.0))
            .collect();
        StateVector { n: self.n, amplitudes }
    }
}

/// Ground-state solve; `degenerate` is set when the gap to the first excited
/// state is below 1e-12 (e.g. the classical ferromagnet at `h_x = 0`,
/// `h_z = 0`), in which case the returned vector is whichever combination the
/// eigensolver produced.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    pub degenerate: bool,
}

pub fn ground_state(params: &IsingParams) -> Result<GroundState, CoreError> {
    let decomp = SpectralDecomposition::new(params)?;
    Ok(ground_state_from(&decomp))
}

pub fn ground_state_from(decomp: &SpectralDecomposition) -> GroundState {
    let gap = decomp.eigenvalues[1] - decomp.eigenvalues[0];
    GroundState {
        energy: decomp.eigenvalues[0],
        state: decomp.eigenstate(0),
        degenerate: gap < 1e-12,
    }
}

/// Unitary propagator for a fixed post-quench Hamiltonian and initial state:
/// `ψ(t) = Σ_n e^{-i E_n t} |n⟩⟨n|ψ0⟩`. The spectral sum is cached so states
/// at arbitrary times cost one dense mat-vec each.
pub struct Propagator<'a> {
    decomp: &'a SpectralDecomposition,
    /// ⟨n|ψ0⟩ packed as a (dim × 2) real matrix [Re | Im].
    coeffs: Mat<f64>,
}

impl<'a> Propagator<'a> {
    pub fn new(decomp: &'a SpectralDecomposition, psi0: &StateVector) -> Result<Self, CoreError> {
        if psi0.dim() != decomp.dim() {
            return Err(CoreError::InvalidParams("state and decomposition dimensions differ".into()));
        }
        let dim = decomp.dim();
        let mut psi = Mat::<f64>::zeros(dim, 2);
        for (x, a) in psi0.amplitudes.iter().enumerate() {
            psi[(x, 0)] = a.re;
            psi[(x, 1)] = a.im;
        }
        let coeffs = decomp.eigenvectors.transpose() * psi.as_ref();
        Ok(Self { decomp, coeffs })
    }

    pub fn at(&self, t: f64) -> StateVector {
        let dim = self.decomp.dim();
        let mut rotated = Mat::<f64>::zeros(dim, 2);
        for nidx in 0..dim {
            let phase = -self.decomp.eigenvalues[nidx] * t;
            let (s, c) = phase.sin_cos();
            let re = self.coeffs[(nidx, 0)];
            let im = self.coeffs[(nidx, 1)];
            rotated[(nidx, 0)] = re * c - im * s;
            rotated[(nidx, 1)] = re * s + im * c;
        }
        let back = &self.decomp.eigenvectors * rotated.as_ref();
        let amplitudes = (0..dim)
            .map(|x| Complex64::new(back[(x, 0)], back[(x, 1)]))
            .collect();
        StateVector { n: self.decomp.n, amplitudes }
    }
}

/// One-shot evolution `ψ(t)` under the Hamiltonian of `params_final`.
///
/// Diagonalizes on every call; batch work should build a
/// [`SpectralDecomposition`] once and use a [`Propagator`].
pub fn evolve(psi0: &StateVector, params_final: &IsingParams, t: f64) -> Result<StateVector, CoreError> {
    let decomp = SpectralDecomposition::new(params_final)?;
    Ok(Propagator::new(&decomp, psi0)?.at(t))
}

/// Energy expectation ⟨ψ|H|ψ⟩ for the given parameters.
pub fn energy_expectation(psi: &StateVector, params: &IsingParams) -> f64 {
    let n = psi.n;
    let mut acc = 0.0;
    for (idx, a) in psi.amplitudes.iter().enumerate() {
        acc += diagonal_energy_index(params, idx) * a.norm_sqr();
        for i in 0..n {
            let b = psi.amplitudes[idx ^ (1 << i)];
            acc += -params.h_x * (a.conj() * b).re;
        }
    }
    acc
}

/// Translation-averaged spin-spin correlator
/// `C^zz_d = (1/N) Σ_i ⟨σ^z_i σ^z_{i+d}⟩`.
///
/// Defined for any `0 ≤ d < N`; the physically independent range is
/// `d ≤ N/2` and `C^zz_d = C^zz_{N-d}` by the averaging.
pub fn czz(psi: &StateVector, d: usize) -> f64 {
    let n = psi.n;
    let mut acc = 0.0;
    for (idx, a) in psi.amplitudes.iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let mut corr = 0.0;
        for i in 0..n {
            let si = if idx >> i & 1 == 0 { 1.0 } else { -1.0 };
            let j = (i + d) % n;
            let sj = if idx >> j & 1 == 0 { 1.0 } else { -1.0 };
            corr += si * sj;
        }
        acc += p * corr / n as f64;
    }
    acc
}

/// All correlators `C^zz_d` for `d = 0 ..= N/2` in one pass.
pub fn czz_profile(psi: &StateVector) -> Vec<f64> {
    let n = psi.n;
    let dmax = n / 2;
    let mut acc = vec![0.0; dmax + 1];
    for (idx, a) in psi.amplitudes.iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        for d in 0..=dmax {
            let mut corr = 0.0;
            for i in 0..n {
                let si = if idx >> i & 1 == 0 { 1.0 } else { -1.0 };
                let j = (i + d) % n;
                let sj = if idx >> j & 1 == 0 { 1.0 } else { -1.0 };
                corr += si * sj;
            }
            acc[d] += p * corr / n as f64;
        }
    }
    acc
}

/// Site-averaged transverse magnetization `(1/N) Σ_i ⟨σ^x_i⟩`.
pub fn sigma_x_expectation(psi: &StateVector) -> f64 {
    let n = psi.n;
    let mut acc = 0.0;
    for (idx, a) in psi.amplitudes.iter().enumerate() {
        for i in 0..n {
            let b = psi.amplitudes[idx ^ (1 << i)];
            acc += (a.conj() * b).re / n as f64;
        }
    }
    acc
}

/// Apply `σ^x_site` to a state (basis flip).
pub fn apply_sigma_x(psi: &StateVector, site: usize) -> StateVector {
    let mut out = vec![Complex64::new(0.0, 0.0); psi.dim()];
    for (idx, a) in psi.amplitudes.iter().enumerate() {
        out[idx ^ (1 << site)] = *a;
    }
    StateVector { n: psi.n, amplitudes: out }
}

/// Apply `σ^y_site` to a state.
pub fn apply_sigma_y(psi: &StateVector, site: usize) -> StateVector {
    let mut out = vec![Complex64::new(0.0, 0.0); psi.dim()];
    for (idx, a) in psi.amplitudes.iter().enumerate() {
        // σ^y |v_i=+1⟩ = i|v_i=-1⟩ ; σ^y |v_i=-1⟩ = -i|v_i=+1⟩
        let up = idx >> site & 1 == 0;
        let factor = if up { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, -1.0) };
        out[idx ^ (1 << site)] += factor * a;
    }
    StateVector { n: psi.n, amplitudes: out }
}

/// Apply `σ^z_site` to a state (diagonal sign).
pub fn apply_sigma_z(psi: &StateVector, site: usize) -> StateVector {
    let amplitudes = psi
        .amplitudes
        .iter()
        .enumerate()
        .map(|(idx, a)| if idx >> site & 1 == 0 { *a } else { -*a })
        .collect();
    StateVector { n: psi.n, amplitudes }
}

/// Half-chain von Neumann entanglement entropy (natural logarithm).
///
/// The cut separates sites `0 .. N/2` from the rest; `N` must be even. The
/// entropy comes from the singular values of the amplitude matrix reshaped to
/// 2^{N/2} × 2^{N/2}.
pub fn entanglement_entropy(psi: &StateVector) -> Result<f64, CoreError> {
    if psi.n % 2 != 0 {
        return Err(CoreError::InvalidParams("half-chain cut needs even N".into()));
    }
    check_size(psi.n)?;
    let half = psi.n / 2;
    let da = 1usize << half;
    // Complex amplitudes: embed as a real (2 da) × da matrix so the real SVD
    // applies; singular values of [Re; Im] stacked match those of the complex
    // matrix only if handled as one complex SVD, so instead build the Hermitian
    // reduced density matrix and diagonalize it.
    let mut rho = Mat::<f64>::zeros(da, da);
    let mut rho_im = Mat::<f64>::zeros(da, da);
    for a in 0..da {
        for ap in 0..da {
            let mut zre = 0.0;
            let mut zim = 0.0;
            for b in 0..da {
                let x = psi.amplitudes[a + (b << half)];
                let y = psi.amplitudes[ap + (b << half)];
                let prod = x * y.conj();
                zre += prod.re;
                zim += prod.im;
            }
            rho[(a, ap)] = zre;
            rho_im[(a, ap)] = zim;
        }
    }
    // ρ_A is Hermitian; embed as the real symmetric [[Re, -Im], [Im, Re]]
    // whose spectrum is that of ρ_A doubled.
    let mut big = Mat::<f64>::zeros(2 * da, 2 * da);
    for a in 0..da {
        for b in 0..da {
            big[(a, b)] = rho[(a, b)];
            big[(a + da, b + da)] = rho[(a, b)];
            big[(a, b + da)] = -rho_im[(a, b)];
            big[(a + da, b)] = rho_im[(a, b)];
        }
    }
    let (evals, _) = linalg::eigh_real(big.as_ref())?;
    let mut s = 0.0;
    // Eigenvalues come doubled; halve by summing all and dividing by 2.
    for &p in &evals {
        if p > 1e-14 {
            s += -p * p.ln();
        }
    }
    Ok(s / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::SpinConfig;
    use num_complex::Complex64 as C64;

    const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn hamiltonian_n2_no_field() {
        let h = build_hamiltonian(&IsingParams::tfim(2, 0.0)).unwrap();
        let expect = [-2.0, 2.0, 2.0, -2.0];
        for (i, e) in expect.iter().enumerate() {
            assert_eq!(h[(i, i)], *e);
        }
    }

    #[test]
    fn hamiltonian_n3_offdiagonal_structure() {
        let h = build_hamiltonian(&IsingParams::tfim(3, 1.0)).unwrap();
        for r in 0..8 {
            let mut offdiag = 0.0;
            for c in 0..8 {
                if r != c {
                    assert!(h[(r, c)] == 0.0 || h[(r, c)] == -1.0);
                    offdiag += h[(r, c)].abs();
                }
            }
            assert_eq!(offdiag, 3.0);
        }
    }

    #[test]
    fn hamiltonian_matches_connected_configs_assembly() {
        use crate::spin::connected_configs;
        let params = IsingParams::new(8, 0.83, -0.41);
        let h = build_hamiltonian(&params).unwrap();
        let dim = 1 << 8;
        let mut assembled = Mat::<f64>::zeros(dim, dim);
        for col in 0..dim {
            let v = SpinConfig::from_index(col, 8);
            for (w, el) in connected_configs(&params, &v) {
                // element is ⟨v|H|w⟩ = ⟨w|H|v⟩ for this real symmetric model
                assembled[(w.to_index(), col)] += el.re;
            }
        }
        for r in 0..dim {
            for c in 0..dim {
                assert!((assembled[(r, c)] - h[(r, c)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn size_limit_enforced() {
        let err = build_hamiltonian(&IsingParams::tfim(15, 1.0)).unwrap_err();
        assert!(matches!(err, CoreError::SizeLimit { n: 15, .. }));
    }

    #[test]
    fn spectral_reconstruction() {
        let params = IsingParams::new(6, 1.2, 0.5);
        let h = build_hamiltonian(&params).unwrap();
        let d = SpectralDecomposition::new(&params).unwrap();
        let dim = d.dim();
        let hmax = (0..dim)
            .flat_map(|r| (0..dim).map(move |c| (r, c)))
            .map(|(r, c)| h[(r, c)].abs())
            .fold(0.0, f64::max);
        // ‖H - VΛV^T‖_max and V^T V = I
        for r in 0..dim {
            for c in 0..dim {
                let mut rec = 0.0;
                let mut ortho = 0.0;
                for k in 0..dim {
                    rec += d.eigenvectors[(r, k)] * d.eigenvalues[k] * d.eigenvectors[(c, k)];
                    ortho += d.eigenvectors[(k, r)] * d.eigenvectors[(k, c)];
                }
                assert!((rec - h[(r, c)]).abs() <= 1e-9 * hmax.max(1.0));
                let target = if r == c { 1.0 } else { 0.0 };
                assert!((ortho - target).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn ground_state_polarized_limit() {
        let gs = ground_state(&IsingParams::tfim(10, 100.0)).unwrap();
        assert!(!gs.degenerate);
        assert!(sigma_x_expectation(&gs.state) >= 0.99995);
        // Rayleigh quotient consistency
        let rq = energy_expectation(&gs.state, &IsingParams::tfim(10, 100.0));
        assert!((rq - gs.energy).abs() < 1e-8 * gs.energy.abs());
    }

    #[test]
    fn ground_state_classical_ferromagnet_degenerate() {
        let gs = ground_state(&IsingParams::tfim(4, 0.0)).unwrap();
        assert!((gs.energy - -4.0).abs() < 1e-12);
        assert!(gs.degenerate);
    }

    #[test]
    fn ground_state_critical_matches_free_fermion_formula() {
        // Independent check: even-sector energy is -Σ_{k>0} ε_k(h) with
        // ε_k = 2 sqrt(1 + h² - 2h cos k), k = (2n-1)π/N.
        let n = 10;
        let h = 1.0;
        let gs = ground_state(&IsingParams::tfim(n, h)).unwrap();
        let mut e = 0.0;
        for m in 0..n / 2 {
            let k = (2 * m + 1) as f64 * std::f64::consts::PI / n as f64;
            e -= 2.0 * (1.0 + h * h - 2.0 * h * k.cos()).sqrt();
        }
        assert!((gs.energy - e).abs() < 1e-9, "ED {} vs formula {}", gs.energy, e);
    }

    #[test]
    fn evolve_identity_at_t0() {
        let gs = ground_state(&IsingParams::tfim(6, 100.0)).unwrap();
        let out = evolve(&gs.state, &IsingParams::tfim(6, 1.0), 0.0).unwrap();
        assert!(out.max_amplitude_diff(&gs.state) < 1e-12);
    }

    #[test]
    fn evolve_eigenstate_phase_only() {
        let params = IsingParams::new(6, 0.8, 0.3);
        let d = SpectralDecomposition::new(&params).unwrap();
        let psi = d.eigenstate(3);
        let out = evolve(&psi, &params, 0.83).unwrap();
        for (a, b) in psi.amplitudes.iter().zip(&out.amplitudes) {
            assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn evolve_unitary_and_energy_conserving() {
        let params_f = IsingParams::new(8, 1.3, 0.4);
        let gs = ground_state(&IsingParams::tfim(8, 100.0)).unwrap();
        let d = SpectralDecomposition::new(&params_f).unwrap();
        let prop = Propagator::new(&d, &gs.state).unwrap();
        let e0 = energy_expectation(&gs.state, &params_f);
        for &t in &[0.3, 1.1, 2.7] {
            let psi = prop.at(t);
            assert!((psi.norm() - 1.0).abs() < 1e-10);
            let e = energy_expectation(&psi, &params_f);
            assert!((e - e0).abs() <= 1e-8 * e0.abs());
        }
    }

    #[test]
    fn evolve_composes_in_time() {
        let params_f = IsingParams::tfim(8, 1.5);
        let gs = ground_state(&IsingParams::tfim(8, 100.0)).unwrap();
        let d = SpectralDecomposition::new(&params_f).unwrap();
        let prop = Propagator::new(&d, &gs.state).unwrap();
        let psi_a = prop.at(0.7);
        let step2 = Propagator::new(&d, &psi_a).unwrap().at(0.5);
        let direct = prop.at(1.2);
        assert!(step2.max_amplitude_diff(&direct) < 1e-9);
    }

    #[test]
    fn quench_to_zero_field_freezes_czz() {
        // h_f = 0, h_z = 0: H_f is diagonal, every σ^z observable is frozen at
        // its initial value, which for the x-polarized ground state is small
        // (of order 1/(2 h_x)) but not exactly zero.
        let gs = ground_state(&IsingParams::tfim(8, 100.0)).unwrap();
        let c0: Vec<f64> = (0..=4).map(|d| czz(&gs.state, d)).collect();
        assert!(c0[1].abs() < 1e-2);
        let psi_t = evolve(&gs.state, &IsingParams::tfim(8, 0.0), 1.7).unwrap();
        for d in 0..=4 {
            assert!((czz(&psi_t, d) - c0[d]).abs() < 1e-10);
        }
    }

    #[test]
    fn czz_identity_cases() {
        let gs = ground_state(&IsingParams::tfim(8, 100.0)).unwrap();
        assert!((czz(&gs.state, 0) - 1.0).abs() < 1e-12);
        assert!(czz(&gs.state, 1).abs() < 1e-2);
        // spatial symmetry d ↔ N - d holds exactly for the averaged correlator
        let psi = evolve(&gs.state, &IsingParams::tfim(8, 1.2), 0.9).unwrap();
        for d in 1..8 {
            assert!((czz(&psi, d) - czz(&psi, 8 - d)).abs() < 1e-10);
        }
    }

    #[test]
    fn entropy_product_state_zero() {
        let gs = ground_state(&IsingParams::tfim(6, 100.0)).unwrap();
        // Nearly a product state; entropy small but nonzero. Use an exact
        // product state instead: all spins up.
        let mut amps = vec![C64::new(0.0, 0.0); 64];
        amps[0] = C64::new(1.0, 0.0);
        let product = StateVector::new(6, amps).unwrap();
        assert!(entanglement_entropy(&product).unwrap() < 1e-10);
        let _ = gs;
    }

    #[test]
    fn entropy_bell_pair() {
        let mut amps = vec![C64::new(0.0, 0.0); 4];
        amps[0] = C64::new(FRAC_1_SQRT_2, 0.0);
        amps[3] = C64::new(0.0, FRAC_1_SQRT_2);
        let bell = StateVector::new(2, amps).unwrap();
        let s = entanglement_entropy(&bell).unwrap();
        assert!((s - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn entropy_grows_then_saturates_after_near_critical_quench() {
        let gs = ground_state(&IsingParams::tfim(10, 100.0)).unwrap();
        let d = SpectralDecomposition::new(&IsingParams::tfim(10, 1.0)).unwrap();
        let prop = Propagator::new(&d, &gs.state).unwrap();
        let s: Vec<f64> = [0.0, 0.5, 1.0, 1.5, 3.0]
            .iter()
            .map(|&t| entanglement_entropy(&prop.at(t)).unwrap())
            .collect();
        assert!(s[1] > s[0] + 0.05);
        assert!(s[2] > s[1] + 0.05);
        // late-time growth much slower than the initial ramp
        assert!((s[4] - s[3]).abs() < (s[2] - s[0]));
    }

    #[test]
    fn pauli_operators_square_to_identity() {
        let gs = ground_state(&IsingParams::new(5, 1.1, 0.2)).unwrap();
        for site in 0..5 {
            let x2 = apply_sigma_x(&apply_sigma_x(&gs.state, site), site);
            let y2 = apply_sigma_y(&apply_sigma_y(&gs.state, site), site);
            let z2 = apply_sigma_z(&apply_sigma_z(&gs.state, site), site);
            assert!(x2.max_amplitude_diff(&gs.state) < 1e-15);
            assert!(y2.max_amplitude_diff(&gs.state) < 1e-15);
            assert!(z2.max_amplitude_diff(&gs.state) < 1e-15);
        }
        // σ^x σ^y = i σ^z on site 0
        let xy = apply_sigma_x(&apply_sigma_y(&gs.state, 0), 0);
        let iz = apply_sigma_z(&gs.state, 0);
        let scaled: Vec<C64> = iz.amplitudes.iter().map(|a| C64::new(0.0, 1.0) * a).collect();
        let iz = StateVector::new(5, scaled).unwrap();
        assert!(xy.max_amplitude_diff(&iz) < 1e-15);
    }
}
