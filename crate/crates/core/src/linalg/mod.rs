//! Sparse and dense linear algebra kernels shared by every module.

mod cg;
mod csr;
mod lanczos;
mod ldlt;

pub use cg::{conjugate_gradient, CgOptions, CgStats};
pub use csr::CsrMatrix;
pub use lanczos::{lowest_eigenpairs, EigenPairs, LanczosOptions};
pub use ldlt::{count_below_inertia, BandLdlt, Inertia};

use nalgebra::{DMatrix, SymmetricEigen};

/// Symmetric linear map on `R^n`.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigen-decomposition of a dense symmetric matrix with ascending eigenvalues.
/// Column `i` of the returned matrix is the eigenvector for value `i`.
pub fn dense_symmetric_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Ascending eigenvalues of a dense symmetric matrix.
pub fn dense_symmetric_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}
