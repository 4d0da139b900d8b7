//! Thin wrappers around the dense linear-algebra backend.
//!
//! Everything here is dispatch and type conversion; no numerics of our own.

use faer::linalg::solvers::Solve;
use faer::{c64, Mat, MatRef, Side};
use num_complex::Complex64;

use crate::error::CoreError;

pub(crate) fn to_c64(z: Complex64) -> c64 {
    c64::new(z.re, z.im)
}

pub(crate) fn from_c64(z: c64) -> Complex64 {
    Complex64::new(z.re, z.im)
}

/// Eigendecomposition of a real symmetric matrix; eigenvalues ascending,
/// eigenvectors as the columns of the returned matrix.
pub(crate) fn eigh_real(a: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>), CoreError> {
    let eig = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| CoreError::Eigen(format!("{e:?}")))?;
    let vals = (0..a.nrows()).map(|i| eig.S()[i]).collect();
    Ok((vals, eig.U().to_owned()))
}

/// Eigendecomposition of a complex Hermitian matrix; eigenvalues ascending.
pub(crate) fn eigh_hermitian(a: MatRef<'_, c64>) -> Result<(Vec<f64>, Mat<c64>), CoreError> {
    let eig = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| CoreError::Eigen(format!("{e:?}")))?;
    let vals = (0..a.nrows()).map(|i| eig.S()[i].re).collect();
    Ok((vals, eig.U().to_owned()))
}

/// Solve `A x = b` for Hermitian positive-definite `A` via Cholesky.
pub(crate) fn solve_hermitian_pd(a: MatRef<'_, c64>, b: &[Complex64]) -> Result<Vec<Complex64>, CoreError> {
    let n = a.nrows();
    let llt = a
        .llt(Side::Lower)
        .map_err(|e| CoreError::SingularSystem(format!("Cholesky failed: {e:?}")))?;
    let mut rhs = Mat::<c64>::zeros(n, 1);
    for (i, z) in b.iter().enumerate() {
        rhs[(i, 0)] = to_c64(*z);
    }
    let x = llt.solve(rhs.as_ref());
    Ok((0..n).map(|i| from_c64(x[(i, 0)])).collect())
}

/// Singular values of a general real matrix, descending.
pub(crate) fn singular_values(a: MatRef<'_, f64>) -> Result<Vec<f64>, CoreError> {
    let svd = a.svd().map_err(|e| CoreError::Eigen(format!("SVD failed: {e:?}")))?;
    Ok((0..a.nrows().min(a.ncols())).map(|i| svd.S()[i]).collect())
}
