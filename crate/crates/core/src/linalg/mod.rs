//! Dense real/complex matrices and the Jacobi eigensolvers.

mod complex;
mod eigen;
pub mod io;
mod matrix;

use thiserror::Error;

pub use complex::{complex_commutator_norm, is_hermitian, is_normal, is_unitary, ComplexMatrix};
pub use eigen::{
    hermitian_eigen, symmetric_eigen, EigenDecomposition, HermitianEigenDecomposition,
    JacobiOptions, MAX_EIGEN_DIM,
};
pub use matrix::{
    commutator_norm, is_diagonal, is_orthogonal, is_symmetric, multiply, orthogonality_defect,
    symmetry_defect, RealMatrix,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix must have at least one row")]
    Empty,
    #[error("matrix is not square: {rows} rows, a row of length {cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not symmetric (max |A_ij - A_ji| = {defect:e})")]
    NotSymmetric { defect: f64 },
    #[error("matrix is not Hermitian (max |A_ij - conj(A_ji)| = {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_diagonal:e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },
    #[error("dimension {n} exceeds the eigensolver limit of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("invalid solver options: need max_sweeps >= 1 and tol >= 0")]
    InvalidOptions,
}
