//! Spin-chain quench-dynamics toolkit.
//!
//! Three families of solvers for the periodic Ising chain in transverse and
//! longitudinal fields, all producing the same spin-spin correlation
//! observables:
//!
//! * [`exact`] / [`sector`] — dense exact diagonalization for `N ≤ 14`, the
//!   ground truth the other engines are measured against;
//! * [`fermion`] — the analytic free-fermion solution of the integrable chain
//!   (`h_z = 0`) at arbitrary `N`;
//! * [`rbm`] + [`variational`] — restricted-Boltzmann-machine variational
//!   states with stochastic-reconfiguration ground-state search and
//!   time-dependent variational Monte Carlo real-time evolution;
//! * [`dtwa`] — the discrete truncated Wigner semi-classical ensemble.
//!
//! [`analysis`] holds the shared observable post-processing (correlation
//! length fits, GGE reference values, deviation series).

pub mod analysis;
pub mod dtwa;
pub mod error;
pub mod exact;
pub mod fermion;
mod linalg;
pub mod rbm;
pub mod sector;
pub mod spin;
pub mod variational;

pub use error::CoreError;
pub use spin::{IsingParams, QuenchProtocol, SpinConfig};
