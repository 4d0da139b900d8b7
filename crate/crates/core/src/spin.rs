//! Spin-chain model definitions: Hamiltonian parameters, σ^z-basis
//! configurations, and the sparse connected-configuration expansion that the
//! estimators and exact solvers consume.
//!
//! The Hamiltonian is
//!
//! ```text
//! H = -J Σ_i σ^z_i σ^z_{(i+1) mod N}  -  h_x Σ_i σ^x_i  -  h_z Σ_i σ^z_i
//! ```
//!
//! on a periodic chain of `N` spins. Basis convention used everywhere in this
//! crate: `v_i = +1` is the σ^z eigenvalue `+1`, and a configuration maps to
//! the index `Σ_i (1 - v_i)/2 * 2^i` (site 0 is the least significant bit, so
//! index 0 is the all-up configuration).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// Couplings and fields of the Ising chain, plus its geometry.
///
/// The boundary is always periodic: the bond set is `{(i, (i+1) mod N)}`. For
/// `N = 2` this yields two bonds on the same pair of sites, i.e. a doubled
/// coupling; that is intentional and covered by tests rather than forbidden.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    /// Ising coupling; the reference experiments all use `J = 1`.
    pub j: f64,
    /// Transverse field h_x.
    pub h_x: f64,
    /// Longitudinal field h_z.
    pub h_z: f64,
    /// Number of sites, at least 2.
    pub n: usize,
}

impl IsingParams {
    /// Transverse-field Ising chain with `J = 1`.
    pub fn tfim(n: usize, h_x: f64) -> Self {
        Self { j: 1.0, h_x, h_z: 0.0, n }
    }

    /// `J = 1` chain with both fields.
    pub fn new(n: usize, h_x: f64, h_z: f64) -> Self {
        Self { j: 1.0, h_x, h_z, n }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.n < 2 {
            return Err(CoreError::InvalidParams(format!(
                "chain needs at least 2 sites, got n = {}",
                self.n
            )));
        }
        if !(self.j.is_finite() && self.h_x.is_finite() && self.h_z.is_finite()) {
            return Err(CoreError::InvalidParams("non-finite coupling or field".into()));
        }
        Ok(())
    }
}

/// A σ^z product configuration: `N` values in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    v: Vec<i8>,
}

impl SpinConfig {
    pub fn new(v: Vec<i8>) -> Result<Self, CoreError> {
        if v.len() < 2 {
            return Err(CoreError::InvalidParams("configuration shorter than 2 sites".into()));
        }
        if v.iter().any(|&s| s != 1 && s != -1) {
            return Err(CoreError::InvalidParams("spin values must be +1 or -1".into()));
        }
        Ok(Self { v })
    }

    /// All spins up (`+1`); basis index 0.
    pub fn all_up(n: usize) -> Self {
        Self { v: vec![1; n] }
    }

    /// Decode a basis index: bit `i` set means `v_i = -1`.
    pub fn from_index(index: usize, n: usize) -> Self {
        let v = (0..n).map(|i| if index >> i & 1 == 0 { 1 } else { -1 }).collect();
        Self { v }
    }

    /// Basis index `Σ_i (1 - v_i)/2 * 2^i`.
    pub fn to_index(&self) -> usize {
        self.v
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &s)| if s < 0 { acc | 1 << i } else { acc })
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.v
    }

    /// σ^z value at `site` as a float.
    pub fn spin(&self, site: usize) -> f64 {
        f64::from(self.v[site])
    }

    /// Flip one spin in place.
    pub fn flip(&mut self, site: usize) {
        self.v[site] = -self.v[site];
    }

    /// Copy with one spin flipped.
    pub fn flipped(&self, site: usize) -> Self {
        let mut out = self.clone();
        out.flip(site);
        out
    }

    /// Cyclic shift by `d` sites: site `i` of the result holds spin `(i - d) mod N`
    /// of the input, i.e. the pattern moves `d` steps around the ring.
    pub fn shifted(&self, d: usize) -> Self {
        let n = self.v.len();
        let v = (0..n).map(|i| self.v[(i + n - d % n) % n]).collect();
        Self { v }
    }
}

/// Sudden-quench protocol: prepare the ground state of `initial`, then evolve
/// with `final_params`, observing on `times`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchProtocol {
    pub initial: IsingParams,
    pub final_params: IsingParams,
    /// Strictly increasing observation grid starting at 0.
    pub times: Vec<f64>,
}

impl QuenchProtocol {
    pub fn new(initial: IsingParams, final_params: IsingParams, times: Vec<f64>) -> Result<Self, CoreError> {
        let p = Self { initial, final_params, times };
        p.validate()?;
        Ok(p)
    }

    /// Uniform grid `0, dt_obs, ..., t_max`.
    pub fn uniform(initial: IsingParams, final_params: IsingParams, t_max: f64, steps: usize) -> Result<Self, CoreError> {
        let times = (0..=steps).map(|k| t_max * k as f64 / steps as f64).collect();
        Self::new(initial, final_params, times)
    }

    pub fn t_max(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        self.initial.validate()?;
        self.final_params.validate()?;
        if self.initial.n != self.final_params.n {
            return Err(CoreError::InvalidParams("initial and final site counts differ".into()));
        }
        if self.times.is_empty() || self.times[0] != 0.0 {
            return Err(CoreError::InvalidParams("time grid must start at 0".into()));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CoreError::InvalidParams("time grid must be strictly increasing".into()));
        }
        if self.t_max() <= 0.0 && self.times.len() > 1 {
            return Err(CoreError::InvalidParams("evolution horizon must be positive".into()));
        }
        Ok(())
    }
}

/// Classical (diagonal) part of the energy:
/// `-J Σ_i v_i v_{(i+1) mod N} - h_z Σ_i v_i`.
pub fn diagonal_energy(params: &IsingParams, v: &SpinConfig) -> f64 {
    let n = params.n;
    debug_assert_eq!(v.len(), n);
    let s = v.spins();
    let mut bond = 0.0;
    let mut field = 0.0;
    for i in 0..n {
        bond += f64::from(s[i]) * f64::from(s[(i + 1) % n]);
        field += f64::from(s[i]);
    }
    -params.j * bond - params.h_z * field
}

/// Same as [`diagonal_energy`] but straight from a basis index; used by the
/// enumeration-heavy backends to avoid building `SpinConfig`s.
pub fn diagonal_energy_index(params: &IsingParams, index: usize) -> f64 {
    let n = params.n;
    let spin = |i: usize| if index >> i & 1 == 0 { 1.0 } else { -1.0 };
    let mut bond = 0.0;
    let mut field = 0.0;
    for i in 0..n {
        bond += spin(i) * spin((i + 1) % n);
        field += spin(i);
    }
    -params.j * bond - params.h_z * field
}

/// All configurations connected to `v` through `H`, with their matrix elements
/// `⟨v|H|v'⟩`.
///
/// Returns exactly `N + 1` entries: the diagonal `(v, diagonal_energy)` first,
/// then the single-spin flips in ascending site order, each with element
/// `-h_x`. Flip entries are emitted even when `h_x = 0` so the output shape is
/// data-independent; callers may skip zeros.
pub fn connected_configs(params: &IsingParams, v: &SpinConfig) -> Vec<(SpinConfig, Complex64)> {
    let mut out = Vec::with_capacity(params.n + 1);
    out.push((v.clone(), Complex64::new(diagonal_energy(params, v), 0.0)));
    for i in 0..params.n {
        out.push((v.flipped(i), Complex64::new(-params.h_x, 0.0)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(bits: &[i8]) -> SpinConfig {
        SpinConfig::new(bits.to_vec()).unwrap()
    }

    #[test]
    fn diagonal_energy_aligned_and_antialigned() {
        let p = IsingParams::tfim(4, 0.0);
        assert_eq!(diagonal_energy(&p, &cfg(&[1, 1, 1, 1])), -4.0);
        assert_eq!(diagonal_energy(&p, &cfg(&[1, -1, 1, -1])), 4.0);
    }

    #[test]
    fn diagonal_energy_with_longitudinal_field() {
        let p = IsingParams::new(3, 0.0, 2.0);
        // -(1 - 1 - 1) - 2*(1) = -1
        assert_eq!(diagonal_energy(&p, &cfg(&[1, 1, -1])), -1.0);
    }

    #[test]
    fn diagonal_energy_matches_index_variant() {
        let p = IsingParams::new(6, 1.3, -0.7);
        for idx in 0..64 {
            let v = SpinConfig::from_index(idx, 6);
            assert_eq!(diagonal_energy(&p, &v), diagonal_energy_index(&p, idx));
        }
    }

    #[test]
    fn index_round_trip() {
        for idx in 0..32 {
            assert_eq!(SpinConfig::from_index(idx, 5).to_index(), idx);
        }
        assert_eq!(SpinConfig::all_up(5).to_index(), 0);
    }

    #[test]
    fn connected_count_and_order() {
        let p = IsingParams::tfim(3, 0.7);
        let v = cfg(&[1, -1, 1]);
        let conn = connected_configs(&p, &v);
        assert_eq!(conn.len(), 4);
        assert_eq!(conn[0].0, v);
        for (i, (w, el)) in conn.iter().enumerate().skip(1) {
            assert_eq!(*w, v.flipped(i - 1));
            assert_eq!(el.re, -0.7);
            assert_eq!(el.im, 0.0);
        }
    }

    #[test]
    fn zero_field_flips_still_emitted() {
        let p = IsingParams::tfim(2, 0.0);
        let conn = connected_configs(&p, &cfg(&[1, 1]));
        assert_eq!(conn.len(), 3);
        assert!(conn[1..].iter().all(|(_, el)| el.norm() == 0.0));
    }

    #[test]
    fn strong_field_flip_elements() {
        let p = IsingParams::tfim(10, 100.0);
        let conn = connected_configs(&p, &SpinConfig::all_up(10));
        assert_eq!(conn[0].1.re, -10.0);
        assert!(conn[1..].iter().all(|(_, el)| el.re == -100.0));
    }

    #[test]
    fn hermiticity_of_elements() {
        let p = IsingParams::new(5, 0.9, 0.3);
        for idx in 0..32 {
            let v = SpinConfig::from_index(idx, 5);
            for (w, el) in connected_configs(&p, &v) {
                let back = connected_configs(&p, &w)
                    .into_iter()
                    .filter(|(u, _)| *u == v)
                    .fold(Complex64::new(0.0, 0.0), |acc, (_, e)| acc + e);
                // diagonal entry appears once; flips of distinct sites give distinct configs
                let fwd = connected_configs(&p, &v)
                    .into_iter()
                    .filter(|(u, _)| *u == w)
                    .fold(Complex64::new(0.0, 0.0), |acc, (_, e)| acc + e);
                assert!((fwd - back.conj()).norm() < 1e-15);
                let _ = el;
            }
        }
    }

    #[test]
    fn translation_covariance() {
        let p = IsingParams::new(6, 1.1, 0.4);
        let v = cfg(&[1, 1, -1, 1, -1, -1]);
        let base = connected_configs(&p, &v);
        for d in 1..6 {
            let shifted = connected_configs(&p, &v.shifted(d));
            // diagonal elements agree
            assert_eq!(base[0].1, shifted[0].1);
            // the flip of site i in the shifted frame matches site (i - d) mod N unshifted
            for i in 0..6 {
                let orig_site = (i + 6 - d) % 6;
                assert_eq!(shifted[1 + i].0, base[1 + orig_site].0.shifted(d));
                assert_eq!(shifted[1 + i].1, base[1 + orig_site].1);
            }
        }
    }

    #[test]
    fn n2_doubled_bond() {
        let p = IsingParams::tfim(2, 0.0);
        assert_eq!(diagonal_energy(&p, &cfg(&[1, 1])), -2.0);
        assert_eq!(diagonal_energy(&p, &cfg(&[1, -1])), 2.0);
    }

    #[test]
    fn params_validation() {
        assert!(IsingParams::tfim(1, 0.0).validate().is_err());
        assert!(IsingParams::tfim(2, f64::NAN).validate().is_err());
        assert!(IsingParams::tfim(2, 1.0).validate().is_ok());
    }

    #[test]
    fn protocol_validation() {
        let i = IsingParams::tfim(4, 100.0);
        let f = IsingParams::tfim(4, 1.0);
        assert!(QuenchProtocol::new(i, f, vec![0.0, 0.5, 1.0]).is_ok());
        assert!(QuenchProtocol::new(i, f, vec![0.5, 1.0]).is_err());
        assert!(QuenchProtocol::new(i, f, vec![0.0, 1.0, 1.0]).is_err());
    }
}
