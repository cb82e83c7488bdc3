use std::ops::Index;

use num_complex::Complex64;

use super::matrix::check_same_dim;
use super::{LinalgError, RealMatrix};

/// Dense square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn from_row_major(n: usize, data: Vec<Complex64>) -> Result<Self, LinalgError> {
        if n == 0 {
            return Err(LinalgError::Empty);
        }
        if data.len() != n * n {
            return Err(LinalgError::NotSquare {
                rows: n,
                cols: data.len() / n,
            });
        }
        if let Some(pos) = data.iter().position(|z| !z.is_finite()) {
            return Err(LinalgError::NonFinite {
                row: pos / n,
                col: pos % n,
            });
        }
        Ok(Self { n, data })
    }

    pub fn from_rows<R: AsRef<[Complex64]>>(rows: &[R]) -> Result<Self, LinalgError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n {
                return Err(LinalgError::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(n, data)
    }

    /// Panics if `n == 0`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(n > 0, "matrix dimension must be positive");
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_real(a: &RealMatrix) -> Self {
        Self::from_fn(a.dim(), |i, j| Complex64::new(a.get(i, j), 0.0))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.data[i * self.n + j] = z;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks_exact(self.n)
    }

    /// Conjugate transpose `A*`.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        check_same_dim(self.n, other.n)?;
        Ok(Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, LinalgError> {
        check_same_dim(self.n, other.n)?;
        let n = self.n;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            let out_row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let aik = self.get(i, k);
                for (o, bkj) in out_row.iter_mut().zip(other.row(k)) {
                    *o += aik * bkj;
                }
            }
        }
        Ok(Self { n, data: out })
    }

    /// Largest `|A_ij − conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// `‖WW* − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.n;
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: Complex64 = self
                    .row(i)
                    .iter()
                    .zip(self.row(j))
                    .map(|(a, b)| a * b.conj())
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                sum += (dot - target).norm_sqr();
            }
        }
        sum.sqrt()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

/// `‖AB − BA‖_F` for complex matrices.
pub fn complex_commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64, LinalgError> {
    let ab = a.matmul(b)?;
    let ba = b.matmul(a)?;
    Ok(ab.sub(&ba)?.frobenius_norm())
}

/// True iff `‖AA* − A*A‖_F ≤ tol`.
pub fn is_normal(a: &ComplexMatrix, tol: f64) -> bool {
    let adj = a.adjoint();
    match complex_commutator_norm(a, &adj) {
        Ok(defect) => defect <= tol,
        Err(_) => false,
    }
}

pub fn is_hermitian(a: &ComplexMatrix, tol: f64) -> bool {
    a.hermitian_defect() <= tol
}

pub fn is_unitary(w: &ComplexMatrix, tol: f64) -> bool {
    w.unitarity_defect() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hermitian_matrices_are_normal() {
        let a = ComplexMatrix::from_rows(&[
            [c(2.0, 0.0), c(1.0, -1.0), c(0.0, 3.0)],
            [c(1.0, 1.0), c(-1.0, 0.0), c(0.5, 0.0)],
            [c(0.0, -3.0), c(0.5, 0.0), c(4.0, 0.0)],
        ])
        .unwrap();
        assert!(is_hermitian(&a, 0.0));
        let norm = a.frobenius_norm();
        assert!(is_normal(&a, 1e-12 * norm * norm));
    }

    #[test]
    fn rotation_is_normal_jordan_block_is_not() {
        let rot = ComplexMatrix::from_rows(&[[c(0.0, 0.0), c(-1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]])
            .unwrap();
        assert!(is_normal(&rot, 0.0));
        assert!(!is_hermitian(&rot, 0.5));
        let jordan =
            ComplexMatrix::from_rows(&[[c(0.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]])
                .unwrap();
        assert!(!is_normal(&jordan, 0.5));
    }

    #[test]
    fn unitary_check() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let w = ComplexMatrix::from_rows(&[[c(s, 0.0), c(0.0, s)], [c(s, 0.0), c(0.0, -s)]]).unwrap();
        assert!(is_unitary(&w, 1e-15));
        assert!(!is_unitary(&ComplexMatrix::from_real(&RealMatrix::identity(2).scale(2.0)), 0.1));
    }
}
