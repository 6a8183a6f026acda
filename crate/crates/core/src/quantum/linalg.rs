//! Eigendecomposition and matrix exponential, backed by nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::matrix::ComplexMatrix;
use crate::error::{QrcError, Result};

pub const HERMITIAN_TOL: f64 = 1e-9;

/// Eigenvalues in ascending order with matching eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Rebuilds `U Λ U†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let u = &self.eigenvectors;
        let n = u.rows();
        let ul = ComplexMatrix::from_fn(n, n, |i, j| u[(i, j)] * self.eigenvalues[j]);
        &ul * &u.adjoint()
    }
}

fn check_hermitian(a: &ComplexMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(QrcError::Argument(format!("matrix is {}x{}, not square", a.rows(), a.cols())));
    }
    let scale = a.max_abs().max(1.0);
    let residual = a.hermitian_residual();
    if residual > HERMITIAN_TOL * scale {
        return Err(QrcError::Argument(format!("matrix is not Hermitian (residual {residual:.3e})")));
    }
    Ok(())
}

fn symmetrized(a: &ComplexMatrix) -> DMatrix<C64> {
    let m = a.to_nalgebra();
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}

pub fn eig_hermitian(a: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(a)?;
    let eig = SymmetricEigen::new(symmetrized(a));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let n = a.rows();
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen { eigenvalues, eigenvectors })
}

/// Eigenvalues only, ascending.
pub fn eigvals_hermitian(a: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(a)?;
    let mut ev: Vec<f64> = symmetrized(a).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn eigvals_real_symmetric(a: &DMatrix<f64>) -> Vec<f64> {
    let sym = (a + a.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Real symmetric eigendecomposition, eigenvalues ascending.
pub fn eig_real_symmetric(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let n = a.nrows();
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Matrix exponential (scaling and squaring with Padé approximants).
pub fn matrix_exp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(QrcError::Dimension("matrix_exp needs a square matrix".into()));
    }
    Ok(ComplexMatrix::from_nalgebra(&a.to_nalgebra().exp()))
}
