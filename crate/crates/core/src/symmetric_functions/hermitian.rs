use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute per-entry tolerance for accepting a matrix as hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Largest supported matrix order.
pub const MAX_DIM: usize = 16;

/// A complex self-adjoint matrix of order `1..=16`.
///
/// Construction validates self-adjointness within [`HERMITIAN_TOL`] and then
/// stores the exact hermitization `(A + A*)/2`, so every downstream spectral
/// routine sees an exactly hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    data: DMatrix<Complex64>,
}

impl HermitianMatrix {
    /// Validates and hermitizes a square complex matrix.
    pub fn new(data: DMatrix<Complex64>) -> Result<Self> {
        let (rows, cols) = data.shape();
        if rows != cols {
            return Err(Error::validation(format!(
                "matrix must be square, got {rows}x{cols}"
            )));
        }
        if rows == 0 || rows > MAX_DIM {
            return Err(Error::validation(format!(
                "matrix order must lie in 1..={MAX_DIM}, got {rows}"
            )));
        }
        if let Some(bad) = data.iter().find(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::validation(format!("non-finite matrix entry {bad}")));
        }
        for i in 0..rows {
            for j in i..rows {
                let defect = (data[(i, j)] - data[(j, i)].conj()).norm();
                if defect > HERMITIAN_TOL {
                    return Err(Error::validation(format!(
                        "matrix is not hermitian: entries ({i},{j}) and ({j},{i}) differ from conjugates by {defect:e}"
                    )));
                }
            }
        }
        Ok(Self::hermitize(data))
    }

    /// Builds a matrix from complex rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::validation("matrix rows must all have the matrix order as length"));
        }
        if n == 0 {
            return Err(Error::validation("matrix must be nonempty"));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Builds a matrix from real rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// The real diagonal matrix `diag(values)`.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let n = values.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// The identity of order `n`.
    pub fn identity(n: usize) -> Self {
        Self::scalar(n, 1.0)
    }

    /// The scalar matrix `λ I_n`.
    pub fn scalar(n: usize, lambda: f64) -> Self {
        Self {
            data: DMatrix::from_diagonal_element(n, n, Complex64::new(lambda, 0.0)),
        }
    }

    /// Replaces `a` by `(a + a*)/2` without validation.
    ///
    /// Used on tensors assembled by this crate, whose anti-hermitian part is
    /// pure roundoff.
    pub fn hermitize(a: DMatrix<Complex64>) -> Self {
        let adjoint = a.adjoint();
        Self {
            data: (a + adjoint).map(|z| z * 0.5),
        }
    }

    /// Matrix order.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    /// Real eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self.data.clone().symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue() > 0.0
    }

    /// `s · A`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            data: self.data.map(|z| z * s),
        }
    }

    /// `A + B`.
    pub fn add(&self, other: &Self) -> Self {
        Self {
            data: &self.data + &other.data,
        }
    }

    /// `(1 - t) A + t B`.
    pub fn lerp(&self, other: &Self, t: f64) -> Self {
        Self {
            data: self.data.map(|z| z * (1.0 - t)) + other.data.map(|z| z * t),
        }
    }

    /// `U* A U`, hermitian for any square `U`.
    pub fn conjugated_by(&self, u: &DMatrix<Complex64>) -> Self {
        Self::hermitize(u.adjoint() * &self.data * u)
    }

    /// Trace, which is real for hermitian matrices.
    pub fn trace(&self) -> f64 {
        self.data.trace().re
    }

    /// Largest entry modulus.
    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest off-diagonal entry modulus.
    pub fn max_abs_off_diagonal(&self) -> f64 {
        let n = self.dim();
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m = m.max(self.data[(i, j)].norm());
                }
            }
        }
        m
    }
}
