//! Matrix-free operator and preconditioner abstractions.

use crate::block::{hermitian_part, BlockVectors, DenseMatrix};
use crate::error::{check_dim, Result};
use crate::field::Field;

/// A Hermitian operator that can be applied to a block of vectors.
///
/// Implementations must be safe to apply concurrently from several threads
/// and must produce each output column with a fixed summation order, so
/// results do not depend on how work is scheduled.
pub trait HermitianOperator<T: Field>: Sync {
    fn dim(&self) -> usize;

    fn apply(&self, x: &BlockVectors<T>) -> Result<BlockVectors<T>>;
}

/// A Hermitian positive definite preconditioner `T`.
pub trait Preconditioner<T: Field>: Sync {
    fn apply(&self, r: &BlockVectors<T>) -> Result<BlockVectors<T>>;
}

impl<T: Field, O: HermitianOperator<T> + ?Sized> HermitianOperator<T> for &O {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, x: &BlockVectors<T>) -> Result<BlockVectors<T>> {
        (**self).apply(x)
    }
}

impl<T: Field, P: Preconditioner<T> + ?Sized> Preconditioner<T> for &P {
    fn apply(&self, r: &BlockVectors<T>) -> Result<BlockVectors<T>> {
        (**self).apply(r)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityPreconditioner;

impl<T: Field> Preconditioner<T> for IdentityPreconditioner {
    fn apply(&self, r: &BlockVectors<T>) -> Result<BlockVectors<T>> {
        Ok(r.clone())
    }
}

/// Dense Hermitian matrix, mostly for tests and small problems.
#[derive(Clone, Debug)]
pub struct DenseOperator<T: Field> {
    matrix: DenseMatrix<T>,
}

impl<T: Field> DenseOperator<T> {
    /// Stores the Hermitian part of `matrix`.
    pub fn new(matrix: DenseMatrix<T>) -> Self {
        Self {
            matrix: hermitian_part(&matrix),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::new(DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                T::from_real(diag[i])
            } else {
                T::zero()
            }
        }))
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.matrix
    }
}

impl<T: Field> HermitianOperator<T> for DenseOperator<T> {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, x: &BlockVectors<T>) -> Result<BlockVectors<T>> {
        check_dim("dense operator apply", self.dim(), x.nrows())?;
        Ok(BlockVectors::from_matrix(&self.matrix * x.as_matrix()))
    }
}
