//! Cyclic Jacobi eigensolvers for real symmetric and complex Hermitian
//! matrices.
//!
//! Both solvers return the eigenvectors as the *rows* of the transform, so
//! that `V A Vᵀ = diag(λ)` (respectively `W A W* = diag(λ)`). Eigenvalues are
//! sorted ascending and every eigenvector row is normalized so that its
//! largest-magnitude component is real and positive.

use num_complex::Complex64;

use super::complex::ComplexMatrix;
use super::matrix::{symmetry_defect, RealMatrix};
use super::LinalgError;

/// Largest dimension accepted by the eigensolvers.
pub const MAX_EIGEN_DIM: usize = 64;

/// Rotations are skipped for off-diagonal entries below this magnitude.
const SKIP_ROTATION: f64 = 1e-30;

/// Relative slack used when picking the largest component of an eigenvector,
/// so that mathematically tied components are resolved by index.
const TIE_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiOptions {
    /// Convergence threshold on `‖offdiag‖_F / ‖A‖_F`.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for JacobiOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_sweeps: 30,
        }
    }
}

/// Eigenvalues (ascending) and the row-wise eigenvector transform.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenDecomposition<M = RealMatrix> {
    pub values: Vec<f64>,
    /// Row `i` is the unit eigenvector for `values[i]`.
    pub vectors: M,
    /// Frobenius norm of the off-diagonal part of `V A Vᵀ`, recomputed from
    /// the input.
    pub residual: f64,
    pub sweeps: usize,
}

pub type HermitianEigenDecomposition = EigenDecomposition<ComplexMatrix>;

fn validate_options(n: usize, opts: &JacobiOptions) -> Result<(), LinalgError> {
    if n > MAX_EIGEN_DIM {
        return Err(LinalgError::TooLarge {
            n,
            cap: MAX_EIGEN_DIM,
        });
    }
    if opts.max_sweeps == 0 || opts.tol.is_nan() || opts.tol < 0.0 {
        return Err(LinalgError::InvalidOptions);
    }
    Ok(())
}

/// Rotation `(c, s)` that zeroes the off-diagonal of `[[app, apq], [apq, aqq]]`
/// under `R M Rᵀ` with `R = [[c, −s], [s, c]]`.
fn rotation(app: f64, aqq: f64, apq: f64) -> (f64, f64) {
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
        if theta < 0.0 {
            -t
        } else {
            t
        }
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, t * c)
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

fn dominant_index(magnitudes: impl Iterator<Item = f64> + Clone) -> usize {
    let max = magnitudes.clone().fold(0.0, f64::max);
    magnitudes
        .into_iter()
        .position(|m| m >= max * (1.0 - TIE_SLACK))
        .unwrap_or(0)
}

/// Diagonalizes a real symmetric matrix with cyclic Jacobi rotations.
///
/// Sweeps visit pairs `(p, q)`, `p < q`, in row-major order. Convergence is
/// declared once the off-diagonal Frobenius norm drops to `tol · ‖A‖_F`.
pub fn symmetric_eigen(
    a: &RealMatrix,
    opts: &JacobiOptions,
) -> Result<EigenDecomposition, LinalgError> {
    let n = a.dim();
    validate_options(n, opts)?;
    let norm = a.frobenius_norm();
    let defect = symmetry_defect(a);
    if defect > 1e-12 * norm {
        return Err(LinalgError::NotSymmetric { defect });
    }

    let mut work = a.symmetric_part();
    let mut v = RealMatrix::identity(n);
    let threshold = opts.tol * norm;
    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&work);
        if off <= threshold {
            break;
        }
        if sweeps == opts.max_sweeps {
            return Err(LinalgError::NoConvergence {
                sweeps,
                off_diagonal: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = work.get(p, q);
                if apq.abs() < SKIP_ROTATION {
                    continue;
                }
                let (c, s) = rotation(work.get(p, p), work.get(q, q), apq);
                rotate_rows(&mut work, p, q, c, s);
                rotate_cols(&mut work, p, q, c, s);
                rotate_rows(&mut v, p, q, c, s);
                work.set(p, q, 0.0);
                work.set(q, p, 0.0);
            }
        }
    }

    let diag = work.diagonal();
    let order = ascending_order(&diag);
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = RealMatrix::from_fn(n, |i, j| {
        let row = v.row(order[i]);
        let k = dominant_index(row.iter().map(|x| x.abs()));
        if row[k] < 0.0 {
            -row[j]
        } else {
            row[j]
        }
    });
    let residual = off_diagonal_norm(&vectors.matmul(a)?.matmul(&vectors.transpose())?);
    Ok(EigenDecomposition {
        values,
        vectors,
        residual,
        sweeps,
    })
}

fn off_diagonal_norm(a: &RealMatrix) -> f64 {
    let n = a.dim();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a.get(i, j) * a.get(i, j);
            }
        }
    }
    sum.sqrt()
}

fn rotate_rows(m: &mut RealMatrix, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..m.dim() {
        let (mp, mq) = (m.get(p, k), m.get(q, k));
        m.set(p, k, c * mp - s * mq);
        m.set(q, k, s * mp + c * mq);
    }
}

fn rotate_cols(m: &mut RealMatrix, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..m.dim() {
        let (mp, mq) = (m.get(k, p), m.get(k, q));
        m.set(k, p, c * mp - s * mq);
        m.set(k, q, s * mp + c * mq);
    }
}

/// Diagonalizes a complex Hermitian matrix with complex Jacobi rotations.
///
/// Each step first applies a diagonal phase that makes `A_pq` real and
/// positive, then a real plane rotation. The accumulated unitary `W`
/// satisfies `W A W* = diag(λ)`.
pub fn hermitian_eigen(
    a: &ComplexMatrix,
    opts: &JacobiOptions,
) -> Result<HermitianEigenDecomposition, LinalgError> {
    let n = a.dim();
    validate_options(n, opts)?;
    let norm = a.frobenius_norm();
    let defect = a.hermitian_defect();
    if defect > 1e-12 * norm {
        return Err(LinalgError::NotHermitian { defect });
    }

    let mut work = ComplexMatrix::from_fn(n, |i, j| 0.5 * (a.get(i, j) + a.get(j, i).conj()));
    let mut w = ComplexMatrix::identity(n);
    let threshold = opts.tol * norm;
    let mut sweeps = 0;
    loop {
        let off = complex_off_diagonal_norm(&work);
        if off <= threshold {
            break;
        }
        if sweeps == opts.max_sweeps {
            return Err(LinalgError::NoConvergence {
                sweeps,
                off_diagonal: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = work.get(p, q);
                let r = apq.norm();
                if r < SKIP_ROTATION {
                    continue;
                }
                let phase = apq / r;
                // row q *= phase, column q *= conj(phase)
                for k in 0..n {
                    work.set(q, k, work.get(q, k) * phase);
                    w.set(q, k, w.get(q, k) * phase);
                }
                for k in 0..n {
                    work.set(k, q, work.get(k, q) * phase.conj());
                }
                let (c, s) = rotation(work.get(p, p).re, work.get(q, q).re, r);
                for m in [&mut work, &mut w] {
                    for k in 0..n {
                        let (mp, mq) = (m.get(p, k), m.get(q, k));
                        m.set(p, k, mp * c - mq * s);
                        m.set(q, k, mp * s + mq * c);
                    }
                }
                for k in 0..n {
                    let (mp, mq) = (work.get(k, p), work.get(k, q));
                    work.set(k, p, mp * c - mq * s);
                    work.set(k, q, mp * s + mq * c);
                }
                let zero = Complex64::new(0.0, 0.0);
                work.set(p, q, zero);
                work.set(q, p, zero);
                work.set(p, p, Complex64::new(work.get(p, p).re, 0.0));
                work.set(q, q, Complex64::new(work.get(q, q).re, 0.0));
            }
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| work.get(i, i).re).collect();
    let order = ascending_order(&diag);
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let phases: Vec<Complex64> = order
        .iter()
        .map(|&i| {
            let row = w.row(i);
            let k = dominant_index(row.iter().map(|z| z.norm()));
            let z = row[k];
            z.conj() / z.norm()
        })
        .collect();
    let vectors = ComplexMatrix::from_fn(n, |i, j| w.get(order[i], j) * phases[i]);
    let residual =
        complex_off_diagonal_norm(&vectors.matmul(a)?.matmul(&vectors.adjoint())?);
    Ok(EigenDecomposition {
        values,
        vectors,
        residual,
        sweeps,
    })
}

fn complex_off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a.get(i, j).norm_sqr();
            }
        }
    }
    sum.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthogonality_defect;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_input_gives_permutation() {
        let a = RealMatrix::from_diagonal(&[3.0, 1.0, 2.0]);
        let eig = symmetric_eigen(&a, &JacobiOptions::default()).unwrap();
        assert_eq!(eig.values, vec![1.0, 2.0, 3.0]);
        let expected = RealMatrix::from_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
            .unwrap();
        assert_eq!(eig.vectors, expected);
        assert_eq!(eig.sweeps, 0);
    }

    #[test]
    fn swap_matrix_analytic() {
        let a = RealMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let eig = symmetric_eigen(&a, &JacobiOptions::default()).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-15);
        assert!((eig.values[1] - 1.0).abs() < 1e-15);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = eig.vectors.row(0);
        // ±(1, −1)/√2; the sign is fixed by the tie-breaking rule.
        assert!((v0[0] - r).abs() < 1e-15 && (v0[1] + r).abs() < 1e-15);
        let v1 = eig.vectors.row(1);
        assert!((v1[0] - r).abs() < 1e-15 && (v1[1] - r).abs() < 1e-15);
    }

    #[test]
    fn analytic_2x2_characteristic_roots() {
        // [[a, b], [b, d]] has roots (a+d)/2 ± sqrt(((a−d)/2)² + b²)
        let (a, b, d) = (1.5, -0.7, -2.25);
        let m = RealMatrix::from_rows(&[[a, b], [b, d]]).unwrap();
        let eig = symmetric_eigen(&m, &JacobiOptions::default()).unwrap();
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        assert!((eig.values[0] - (mid - rad)).abs() < 1e-10);
        assert!((eig.values[1] - (mid + rad)).abs() < 1e-10);
    }

    #[test]
    fn analytic_3x3_tridiagonal_roots() {
        // tridiag(1, 2, 1) of order 3 has eigenvalues 2 − √2, 2, 2 + √2.
        let m = RealMatrix::from_rows(&[[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]])
            .unwrap();
        let eig = symmetric_eigen(&m, &JacobiOptions::default()).unwrap();
        let s = 2f64.sqrt();
        for (got, want) in eig.values.iter().zip([2.0 - s, 2.0, 2.0 + s]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = RealMatrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        assert!(matches!(
            symmetric_eigen(&m, &JacobiOptions::default()),
            Err(LinalgError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn reports_no_convergence() {
        let m = RealMatrix::from_fn(6, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let opts = JacobiOptions {
            tol: 1e-14,
            max_sweeps: 1,
        };
        assert!(matches!(
            symmetric_eigen(&m, &opts),
            Err(LinalgError::NoConvergence { sweeps: 1, .. })
        ));
    }

    #[test]
    fn rejects_oversized_input() {
        let m = RealMatrix::identity(MAX_EIGEN_DIM + 1);
        assert!(matches!(
            symmetric_eigen(&m, &JacobiOptions::default()),
            Err(LinalgError::TooLarge { .. })
        ));
    }

    #[test]
    fn zero_matrix_is_already_diagonal() {
        let eig = symmetric_eigen(&RealMatrix::zeros(3), &JacobiOptions::default()).unwrap();
        assert_eq!(eig.values, vec![0.0; 3]);
        assert_eq!(eig.residual, 0.0);
    }

    #[test]
    fn hilbert_matrix_reconstructs() {
        let m = RealMatrix::from_fn(8, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let eig = symmetric_eigen(&m, &JacobiOptions::default()).unwrap();
        assert!(eig.residual <= 1e-10 * m.frobenius_norm());
        assert!(orthogonality_defect(&eig.vectors) <= 1e-12 * 8.0);
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn pauli_y_eigenvalues() {
        let y = ComplexMatrix::from_rows(&[[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]])
            .unwrap();
        let eig = hermitian_eigen(&y, &JacobiOptions::default()).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
        assert!(eig.vectors.unitarity_defect() < 1e-14);
        assert!(eig.residual < 1e-14);
    }

    #[test]
    fn scalar_hermitian() {
        let a = ComplexMatrix::from_rows(&[[c(7.0, 0.0)]]).unwrap();
        let eig = hermitian_eigen(&a, &JacobiOptions::default()).unwrap();
        assert_eq!(eig.values, vec![7.0]);
        assert_eq!(eig.vectors.get(0, 0), c(1.0, 0.0));
    }

    #[test]
    fn hermitian_embedding_agrees_with_real() {
        let m = RealMatrix::from_fn(5, |i, j| ((i + j) as f64).cos() + (i * j) as f64 * 0.1);
        let real = symmetric_eigen(&m, &JacobiOptions::default()).unwrap();
        let cplx = hermitian_eigen(&ComplexMatrix::from_real(&m), &JacobiOptions::default()).unwrap();
        for (a, b) in real.values.iter().zip(&cplx.values) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = ComplexMatrix::from_rows(&[[c(0.0, 1.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]])
            .unwrap();
        assert!(matches!(
            hermitian_eigen(&a, &JacobiOptions::default()),
            Err(LinalgError::NotHermitian { .. })
        ));
    }
}
