//! The small dense Hermitian generalized eigenproblem `A c = theta B c`.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd;

use crate::block::{adjoint_mul, hermitian_part, DenseMatrix};
use crate::error::{check_dim, EigenError, Result};
use crate::field::Field;

/// `B` is treated as singular when its smallest eigenvalue is below this
/// fraction of its largest.
pub const GRAM_SINGULARITY_TOL: f64 = 1e-12;

/// Projected pair `(S* A S, S* S)`, symmetrized on construction.
#[derive(Clone, Debug)]
pub struct SmallPencil<T: Field> {
    a_hat: DenseMatrix<T>,
    b_hat: DenseMatrix<T>,
}

impl<T: Field> SmallPencil<T> {
    pub fn new(a_hat: DenseMatrix<T>, b_hat: DenseMatrix<T>) -> Result<Self> {
        let d = a_hat.nrows();
        check_dim("pencil a_hat columns", d, a_hat.ncols())?;
        check_dim("pencil b_hat rows", d, b_hat.nrows())?;
        check_dim("pencil b_hat columns", d, b_hat.ncols())?;
        Ok(Self {
            a_hat: hermitian_part(&a_hat),
            b_hat: hermitian_part(&b_hat),
        })
    }

    pub fn dim(&self) -> usize {
        self.a_hat.nrows()
    }

    pub fn a_hat(&self) -> &DenseMatrix<T> {
        &self.a_hat
    }

    pub fn b_hat(&self) -> &DenseMatrix<T> {
        &self.b_hat
    }
}

/// Lowest eigenpairs of a pencil; `c` is `B`-orthonormal.
#[derive(Clone, Debug)]
pub struct PencilSolution<T: Field> {
    pub omega: Vec<f64>,
    pub c: DenseMatrix<T>,
}

/// Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Only the lower triangle is read. The decomposition always runs
/// sequentially so its result does not depend on the thread pool.
pub fn hermitian_eigh<T: Field>(m: &DenseMatrix<T>) -> Result<(Vec<f64>, DenseMatrix<T>)> {
    T::hermitian_eigh(m)
}

pub(crate) fn faer_hermitian_eigh<T>(m: &DenseMatrix<T>) -> Result<(Vec<f64>, DenseMatrix<T>)>
where
    T: Field + faer::traits::ComplexField,
{
    let n = m.nrows();
    check_dim("hermitian_eigh columns", n, m.ncols())?;
    let a = faer::Mat::<T>::from_fn(n, n, |i, j| m[(i, j)]);
    let mut s = faer::diag::Diag::<T>::zeros(n);
    let mut u = faer::Mat::<T>::zeros(n, n);
    let par = faer::Par::Seq;
    let scratch = evd::self_adjoint_evd_scratch::<T>(n, evd::ComputeEigenvectors::Yes, par, Default::default());
    let mut mem = MemBuffer::new(scratch);
    evd::self_adjoint_evd(a.as_ref(), s.as_mut(), Some(u.as_mut()), par, MemStack::new(&mut mem), Default::default())
        .map_err(|e| EigenError::DenseSolver(format!("{e:?}")))?;
    let values: Vec<f64> = s.column_vector().iter().map(|v| v.parts().0).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(EigenError::DenseSolver("non-finite eigenvalue".into()));
    }
    Ok((values, DenseMatrix::from_fn(n, n, |i, j| u[(i, j)])))
}

/// The `want` algebraically smallest eigenpairs of `a_hat c = omega b_hat c`.
///
/// `b_hat` is reduced through its own eigendecomposition, `B = V D V*`,
/// which also exposes numerical singularity directly.
pub fn solve_pencil<T: Field>(p: &SmallPencil<T>, want: usize) -> Result<PencilSolution<T>> {
    let d = p.dim();
    if want == 0 || want > d {
        return Err(EigenError::InvalidOptions(format!(
            "requested {want} eigenpairs from a pencil of dimension {d}"
        )));
    }
    let (b_vals, b_vecs) = hermitian_eigh(&p.b_hat)?;
    let scale = b_vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let min_eig = b_vals[0];
    if !(scale > 0.0) || min_eig <= GRAM_SINGULARITY_TOL * scale {
        return Err(EigenError::SingularGram {
            min_eigenvalue: min_eig,
            scale,
        });
    }
    let mut z = b_vecs;
    for (mut col, v) in z.column_iter_mut().zip(&b_vals) {
        col.unscale_mut(v.sqrt());
    }
    let reduced = adjoint_mul(&z, &(&p.a_hat * &z));
    let (omega, y) = hermitian_eigh(&reduced)?;
    let c = z * y.columns(0, want);
    Ok(PencilSolution {
        omega: omega[..want].to_vec(),
        c,
    })
}
