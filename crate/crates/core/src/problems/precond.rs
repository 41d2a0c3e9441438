use crate::block::BlockVectors;
use crate::error::{check_dim, EigenError, Result};
use crate::field::Field;
use crate::operator::Preconditioner;

use super::sparse::SparseHermitian;

/// Smallest denominator used by [`jacobi_preconditioner`].
pub const JACOBI_FLOOR: f64 = 1e-8;

/// `T = diag(d)` with every `d_i > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalPreconditioner {
    d: Vec<f64>,
}

impl DiagonalPreconditioner {
    pub fn new(d: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = d.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(EigenError::InvalidOptions(format!(
                "diagonal preconditioner entry {i} is {v}, must be positive and finite"
            )));
        }
        Ok(Self { d })
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.d
    }

    /// `T^{-1} r`.
    pub fn apply_inverse<T: Field>(&self, r: &BlockVectors<T>) -> Result<BlockVectors<T>> {
        self.scale(r, |d| 1.0 / d)
    }

    fn scale<T: Field>(&self, r: &BlockVectors<T>, f: impl Fn(f64) -> f64) -> Result<BlockVectors<T>> {
        check_dim("preconditioner input rows", self.d.len(), r.nrows())?;
        let mut out = r.clone();
        for mut col in out.as_matrix_mut().column_iter_mut() {
            for (x, &d) in col.iter_mut().zip(&self.d) {
                *x *= T::from_real(f(d));
            }
        }
        Ok(out)
    }
}

impl<T: Field> Preconditioner<T> for DiagonalPreconditioner {
    fn apply(&self, r: &BlockVectors<T>) -> Result<BlockVectors<T>> {
        self.scale(r, |d| d)
    }
}

/// `d_i = 1 / max(a_ii - shift, JACOBI_FLOOR)`.
pub fn jacobi_preconditioner<T: Field>(a: &SparseHermitian<T>, shift: f64) -> DiagonalPreconditioner {
    let d = a
        .diagonal()
        .into_iter()
        .map(|aii| 1.0 / (aii - shift).max(JACOBI_FLOOR))
        .collect();
    DiagonalPreconditioner { d }
}
