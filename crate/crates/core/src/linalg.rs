//! Dense symmetric eigendecomposition, Cholesky and inversion on ndarray
//! matrices.

use crate::error::{Error, Result};
use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, MatRef, Side};
use ndarray::{Array1, Array2};

fn to_faer(a: &Array2<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

fn from_faer(a: MatRef<'_, f64>) -> Array2<f64> {
    Array2::from_shape_fn((a.nrows(), a.ncols()), |(i, j)| a[(i, j)])
}

fn square(a: &Array2<f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Structure(format!("expected a square matrix, got {:?}", a.dim())));
    }
    Ok(())
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a
/// symmetric matrix; only the lower triangle is read.
pub fn eigh(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    square(a)?;
    let e = to_faer(a)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Linalg(format!("symmetric eigensolver: {e:?}")))?;
    let vals = Array1::from_iter(e.S().column_vector().iter().copied());
    Ok((vals, from_faer(e.U())))
}

/// Eigenvalues (ascending) of a symmetric matrix.
pub fn eigvalsh(a: &Array2<f64>) -> Result<Array1<f64>> {
    square(a)?;
    let vals = to_faer(a)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Linalg(format!("symmetric eigensolver: {e:?}")))?;
    Ok(Array1::from(vals))
}

/// Upper factor R with a = Rᵀ R for symmetric positive definite a.
pub fn cholesky_upper(a: &Array2<f64>) -> Result<Array2<f64>> {
    square(a)?;
    let l = to_faer(a)
        .llt(Side::Lower)
        .map_err(|e| Error::Linalg(format!("cholesky: {e:?}")))?;
    Ok(from_faer(l.L()).reversed_axes())
}

/// Inverse of a general square matrix.
pub fn inv(a: &Array2<f64>) -> Result<Array2<f64>> {
    square(a)?;
    let m = to_faer(a);
    let lu = m.partial_piv_lu();
    let inv = lu.inverse();
    if inv.col_iter().flat_map(|c| c.iter().copied().collect::<Vec<_>>()).any(|x| !x.is_finite()) {
        return Err(Error::Linalg("matrix is singular".into()));
    }
    Ok(from_faer(inv.as_ref()))
}
