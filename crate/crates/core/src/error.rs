use thiserror::Error;

/// Errors shared across the solver modules.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("system size n = {n} exceeds the dense-solver limit of {limit}")]
    SizeLimit { n: usize, limit: usize },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("gapless point: dispersion vanishes at h = {h}, k = {k}")]
    GaplessPoint { h: f64, k: f64 },

    #[error("matrix is not antisymmetric: max |A + A^T| = {0:.3e}")]
    NotAntisymmetric(f64),

    #[error("Wigner function has negative weight {weight:.3e}; sampling is not possible")]
    NegativeWigner { weight: f64 },

    #[error("regularized linear system could not be solved: {0}")]
    SingularSystem(String),

    #[error("pseudo-inverse has rank 0: all singular values below cutoff")]
    RankZero,

    #[error("correlations below floor ({0:.3e}): correlation length undefined")]
    BelowFloor(f64),

    #[error("correlation-length fit has nonpositive decay rate")]
    NonDecaying,

    #[error("log argument {0} is not greater than 1: GGE correlation length undefined")]
    GgeDomain(f64),

    #[error("time grids differ: {0}")]
    GridMismatch(String),

    #[error("integration aborted at t = {t}: {reason}")]
    Diverged { t: f64, reason: String },

    #[error("non-convergence after {iters} iterations: {details}")]
    NotConverged { iters: usize, details: String },

    #[error("lookup table out of sync: max |Δθ| = {0:.3e}")]
    StaleCache(f64),

    #[error("snapshot i/o: {0}")]
    Snapshot(String),
}
