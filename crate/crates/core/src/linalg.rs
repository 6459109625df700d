//! Thin helpers over nalgebra's dense factorizations.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// A reusable Cholesky factorization.
pub struct SpdFactor(Cholesky<f64, Dyn>);

impl SpdFactor {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Cholesky::new(m)
            .map(SpdFactor)
            .ok_or_else(|| Error::LinearAlgebra("matrix is not positive definite".into()))
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let b = DVector::from_column_slice(rhs);
        self.0.solve(&b).as_slice().to_vec()
    }
}

/// Solve with the Cholesky factorization, returning `None` if `m` is not
/// positive definite.
pub fn spd_solve(m: DMatrix<f64>, rhs: &[f64]) -> Option<Vec<f64>> {
    SpdFactor::new(m).ok().map(|f| f.solve(rhs))
}

/// General solve by partial-pivoting LU.
pub fn lu_solve(m: DMatrix<f64>, rhs: &[f64]) -> Option<Vec<f64>> {
    let b = DVector::from_column_slice(rhs);
    let x = m.lu().solve(&b)?;
    if x.iter().all(|v| v.is_finite()) {
        Some(x.as_slice().to_vec())
    } else {
        None
    }
}

pub fn dot_h(h: f64, a: &[f64], b: &[f64]) -> f64 {
    h * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}
