//! Dense tall-skinny column blocks and the kernels that act on them.

use std::ops::Range;

use nalgebra::{DMatrix, DMatrixView};
use rand::Rng;

use crate::error::{check_dim, EigenError, Result};
use crate::field::Field;

/// Small dense matrix (Gram blocks, coefficient blocks, projected operators).
pub type DenseMatrix<T> = DMatrix<T>;

/// An `n x m` block of column vectors, stored column major.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockVectors<T: Field> {
    data: DMatrix<T>,
}

impl<T: Field> BlockVectors<T> {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            data: DMatrix::zeros(n, m),
        }
    }

    pub fn from_matrix(data: DMatrix<T>) -> Self {
        Self { data }
    }

    pub fn from_fn(n: usize, m: usize, f: impl FnMut(usize, usize) -> T) -> Self {
        Self {
            data: DMatrix::from_fn(n, m, f),
        }
    }

    /// Columns `e_i` of the identity for each index in `indices`.
    pub fn unit_columns(n: usize, indices: &[usize]) -> Self {
        Self::from_fn(n, indices.len(), |i, j| {
            if i == indices[j] {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    /// Independent standard normal entries.
    pub fn random<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Self {
        // Fill column by column so the stream layout does not depend on storage order.
        let mut data = DMatrix::zeros(n, m);
        for j in 0..m {
            for i in 0..n {
                data[(i, j)] = T::sample_normal(rng);
            }
        }
        Self { data }
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.ncols() == 0
    }

    pub fn as_matrix(&self) -> &DMatrix<T> {
        &self.data
    }

    pub fn as_matrix_mut(&mut self) -> &mut DMatrix<T> {
        &mut self.data
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.data
    }

    pub fn view(&self) -> DMatrixView<'_, T> {
        self.data.as_view()
    }

    pub fn column(&self, j: usize) -> BlockVectors<T> {
        self.columns(j..j + 1)
    }

    pub fn columns(&self, range: Range<usize>) -> BlockVectors<T> {
        Self {
            data: self.data.columns_range(range).into_owned(),
        }
    }

    pub fn select_columns(&self, indices: &[usize]) -> BlockVectors<T> {
        Self {
            data: self.data.select_columns(indices),
        }
    }

    /// Overwrites columns `start..start + block.ncols()` with `block`.
    pub fn set_columns(&mut self, start: usize, block: &BlockVectors<T>) {
        self.data
            .columns_mut(start, block.ncols())
            .copy_from(&block.data);
    }

    /// Horizontal concatenation; all parts must share the row dimension.
    pub fn hstack(parts: &[&BlockVectors<T>]) -> Result<BlockVectors<T>> {
        let n = parts.first().map_or(0, |p| p.nrows());
        let m = parts.iter().map(|p| p.ncols()).sum();
        let mut out = Self::zeros(n, m);
        let mut at = 0;
        for p in parts {
            check_dim("hstack", n, p.nrows())?;
            out.set_columns(at, p);
            at += p.ncols();
        }
        Ok(out)
    }

    /// `self * coeffs` for a small dense coefficient block.
    pub fn combine(&self, coeffs: &DenseMatrix<T>) -> BlockVectors<T> {
        Self {
            data: &self.data * coeffs,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.norm()
    }

    pub fn column_norms(&self) -> Vec<f64> {
        self.data.column_iter().map(|c| c.norm()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| {
            let (re, im) = v.parts();
            re.is_finite() && im.is_finite()
        })
    }

    pub fn scale_columns(&mut self, factors: &[f64]) {
        for (mut col, &f) in self.data.column_iter_mut().zip(factors) {
            col *= T::from_real(f);
        }
    }
}

impl<T: Field> std::ops::Sub for &BlockVectors<T> {
    type Output = BlockVectors<T>;

    fn sub(self, rhs: Self) -> BlockVectors<T> {
        BlockVectors {
            data: &self.data - &rhs.data,
        }
    }
}

impl<T: Field> std::ops::Add for &BlockVectors<T> {
    type Output = BlockVectors<T>;

    fn add(self, rhs: Self) -> BlockVectors<T> {
        BlockVectors {
            data: &self.data + &rhs.data,
        }
    }
}

/// `A* B` through an explicit adjoint, which lets the product use the
/// blocked matrix kernel.
pub(crate) fn adjoint_mul<T: Field>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> DenseMatrix<T> {
    a.adjoint() * b
}

/// `X* Y`.
pub fn block_inner<T: Field>(x: &BlockVectors<T>, y: &BlockVectors<T>) -> Result<DenseMatrix<T>> {
    check_dim("block_inner", x.nrows(), y.nrows())?;
    Ok(adjoint_mul(&x.data, &y.data))
}

/// `Y - X (X* Y)`.
pub fn project_out<T: Field>(x: &BlockVectors<T>, y: &BlockVectors<T>) -> Result<BlockVectors<T>> {
    check_dim("project_out", x.nrows(), y.nrows())?;
    if x.is_empty() || y.is_empty() {
        return Ok(y.clone());
    }
    let coeffs = adjoint_mul(&x.data, &y.data);
    let mut out = y.data.clone();
    out.gemm(-T::one(), &x.data, &coeffs, T::one());
    Ok(BlockVectors { data: out })
}

/// `(M + M*) / 2`.
pub fn hermitian_part<T: Field>(m: &DenseMatrix<T>) -> DenseMatrix<T> {
    let half = T::from_real(0.5);
    (m + m.adjoint()) * half
}

/// `|X* X - I|_F`, the loss of orthonormality of a block.
pub fn orthonormality_loss<T: Field>(x: &BlockVectors<T>) -> f64 {
    let mut g = adjoint_mul(&x.data, &x.data);
    for i in 0..g.nrows() {
        g[(i, i)] -= T::one();
    }
    g.norm()
}

// Pivots below this fraction of the original diagonal entry count as breakdown.
const CHOLESKY_PIVOT_FLOOR: f64 = 10.0 * f64::EPSILON;

/// Upper triangular `R` with `G = R* R` and positive real diagonal.
pub(crate) fn cholesky_upper<T: Field>(g: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let m = g.nrows();
    let mut r = DenseMatrix::<T>::zeros(m, m);
    for j in 0..m {
        let mut d = g[(j, j)].real();
        for k in 0..j {
            d -= r[(k, j)].modulus_squared();
        }
        let gjj = g[(j, j)].real();
        if !(d > CHOLESKY_PIVOT_FLOOR * gjj) || !(gjj > 0.0) {
            return Err(EigenError::RankDeficiency { column: j });
        }
        let rjj = d.sqrt();
        r[(j, j)] = T::from_real(rjj);
        for i in j + 1..m {
            let mut s = g[(j, i)];
            for k in 0..j {
                s -= r[(k, j)].conjugate() * r[(k, i)];
            }
            r[(j, i)] = s.unscale(rjj);
        }
    }
    Ok(r)
}

/// Inverse of an upper triangular matrix with nonzero diagonal.
pub(crate) fn upper_triangular_inverse<T: Field>(r: &DenseMatrix<T>) -> DenseMatrix<T> {
    let m = r.nrows();
    let mut inv = DenseMatrix::<T>::zeros(m, m);
    for j in 0..m {
        inv[(j, j)] = T::one() / r[(j, j)];
        for i in (0..j).rev() {
            let mut s = T::zero();
            for k in i + 1..=j {
                s += r[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s / r[(i, i)];
        }
    }
    inv
}

fn cholesky_qr_once<T: Field>(x: &BlockVectors<T>) -> Result<(BlockVectors<T>, DenseMatrix<T>)> {
    let g = hermitian_part(&adjoint_mul(&x.data, &x.data));
    let r = cholesky_upper(&g)?;
    let q = x.combine(&upper_triangular_inverse(&r));
    Ok((q, r))
}

/// Cholesky QR factorization `X = Q R`.
///
/// Runs two passes (CholeskyQR2) so the orthonormality of `Q` does not
/// degrade with the square of the condition number of `X`. Breakdown in
/// either pass is reported as [`EigenError::RankDeficiency`] with the index
/// of the failing column.
pub fn cholesky_qr<T: Field>(x: &BlockVectors<T>) -> Result<(BlockVectors<T>, DenseMatrix<T>)> {
    if x.is_empty() {
        return Ok((x.clone(), DenseMatrix::zeros(0, 0)));
    }
    let (q1, r1) = cholesky_qr_once(x)?;
    let (q, r2) = cholesky_qr_once(&q1)?;
    Ok((q, r2 * r1))
}

/// Largest `|X* X - I|_F` for which the truncated polar series is applied.
pub const TAYLOR_POLAR_THRESHOLD: f64 = 0.1;

/// Approximate polar factor `X (X* X)^{-1/2}` from the truncated binomial
/// series of `(I + Y)^{-1/2}`, `Y = X* X - I`.
///
/// `terms` counts the correction terms after the identity: `terms = 3`
/// evaluates `I - Y/2 + 3Y^2/8 - 5Y^3/16`.
pub fn taylor_polar_orth<T: Field>(x: &BlockVectors<T>, terms: usize) -> Result<BlockVectors<T>> {
    Ok(x.combine(&taylor_polar_factor(x, terms)?))
}

/// The small matrix `M` with `X M` the truncated polar factor, so callers
/// can carry cached products such as `A X` along.
pub fn taylor_polar_factor<T: Field>(x: &BlockVectors<T>, terms: usize) -> Result<DenseMatrix<T>> {
    if terms == 0 {
        return Err(EigenError::InvalidOptions(
            "taylor polar orthonormalization needs at least one correction term".into(),
        ));
    }
    let m = x.ncols();
    let mut y = hermitian_part(&adjoint_mul(&x.data, &x.data));
    for i in 0..m {
        y[(i, i)] -= T::one();
    }
    let deviation = y.norm();
    if !(deviation <= TAYLOR_POLAR_THRESHOLD) {
        return Err(EigenError::Applicability {
            deviation,
            threshold: TAYLOR_POLAR_THRESHOLD,
        });
    }
    let identity = DenseMatrix::<T>::identity(m, m);
    if deviation == 0.0 {
        return Ok(identity);
    }
    // Coefficients of (1 + y)^{-1/2}: c_i = c_{i-1} * -(2i - 1) / (2i).
    let mut coeffs = Vec::with_capacity(terms + 1);
    coeffs.push(1.0);
    for i in 1..=terms {
        let prev = coeffs[i - 1];
        coeffs.push(-prev * (2 * i - 1) as f64 / (2 * i) as f64);
    }
    // Horner evaluation.
    let mut poly = &identity * T::from_real(coeffs[terms]);
    for &c in coeffs[..terms].iter().rev() {
        poly = &y * poly + &identity * T::from_real(c);
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn naive_inner<T: Field>(x: &BlockVectors<T>, y: &BlockVectors<T>) -> DenseMatrix<T> {
        let (n, mx, my) = (x.nrows(), x.ncols(), y.ncols());
        DenseMatrix::from_fn(mx, my, |a, b| {
            let mut s = T::zero();
            for i in 0..n {
                s += x.as_matrix()[(i, a)].conjugate() * y.as_matrix()[(i, b)];
            }
            s
        })
    }

    fn mgs<T: Field>(x: &BlockVectors<T>) -> BlockVectors<T> {
        let mut q = x.clone();
        for j in 0..q.ncols() {
            for i in 0..j {
                let qi = q.as_matrix().column(i).into_owned();
                let proj = qi.dotc(&q.as_matrix().column(j));
                let mut cj = q.as_matrix_mut().column_mut(j);
                cj -= qi * proj;
            }
            let nrm = q.as_matrix().column(j).norm();
            let mut cj = q.as_matrix_mut().column_mut(j);
            cj.unscale_mut(nrm);
        }
        q
    }

    #[test]
    fn inner_of_unit_columns() {
        let x = BlockVectors::<f64>::unit_columns(3, &[0, 1]);
        assert_eq!(block_inner(&x, &x).unwrap(), DenseMatrix::identity(2, 2));
        let e1 = BlockVectors::<f64>::unit_columns(2, &[0]);
        let e2 = BlockVectors::<f64>::unit_columns(2, &[1]);
        assert_eq!(block_inner(&e1, &e2).unwrap()[(0, 0)], 0.0);
    }

    #[test]
    fn inner_matches_triple_loop() {
        let mut r = rng(11);
        let x = BlockVectors::<f64>::random(8, 3, &mut r);
        let y = BlockVectors::<f64>::random(8, 2, &mut r);
        let diff = block_inner(&x, &y).unwrap() - naive_inner(&x, &y);
        assert!(diff.amax() < 1e-14);

        let xc = BlockVectors::<Complex64>::random(8, 3, &mut r);
        let yc = BlockVectors::<Complex64>::random(8, 2, &mut r);
        let diff = block_inner(&xc, &yc).unwrap() - naive_inner(&xc, &yc);
        assert!(diff.norm() < 1e-14);
    }

    #[test]
    fn inner_rejects_mismatch() {
        let x = BlockVectors::<f64>::zeros(3, 1);
        let y = BlockVectors::<f64>::zeros(4, 1);
        assert!(matches!(block_inner(&x, &y), Err(EigenError::Dimension { .. })));
        assert!(matches!(project_out(&x, &y), Err(EigenError::Dimension { .. })));
    }

    #[test]
    fn project_out_cases() {
        let x = BlockVectors::<f64>::unit_columns(4, &[0, 1]);
        let y = BlockVectors::<f64>::unit_columns(4, &[2, 3]);
        assert_eq!(project_out(&x, &y).unwrap(), y);
        assert_eq!(project_out(&x, &x).unwrap().frobenius_norm(), 0.0);

        let mut r = rng(3);
        let (q, _) = cholesky_qr(&BlockVectors::<f64>::random(10, 3, &mut r)).unwrap();
        let y = BlockVectors::random(10, 4, &mut r);
        let out = project_out(&q, &y).unwrap();
        assert!(block_inner(&q, &out).unwrap().norm() < 1e-13);
    }

    #[test]
    fn cholesky_qr_trivial_cases() {
        let x = BlockVectors::<f64>::unit_columns(5, &[1, 3]);
        let (q, r) = cholesky_qr(&x).unwrap();
        assert_eq!(q, x);
        assert_eq!(r, DenseMatrix::identity(2, 2));

        let x = BlockVectors::<f64>::from_fn(2, 1, |i, _| if i == 0 { 2.0 } else { 0.0 });
        let (q, r) = cholesky_qr(&x).unwrap();
        assert_eq!(q.as_matrix()[(0, 0)], 1.0);
        assert_eq!(q.as_matrix()[(1, 0)], 0.0);
        assert_eq!(r[(0, 0)], 2.0);
    }

    #[test]
    fn cholesky_qr_matches_gram_schmidt() {
        let mut r = rng(12);
        let x = BlockVectors::<f64>::random(12, 4, &mut r);
        let (q, rr) = cholesky_qr(&x).unwrap();
        let oracle = mgs(&x);
        for j in 0..4 {
            let a = q.as_matrix().column(j);
            let b = oracle.as_matrix().column(j);
            let sign = a.dot(&b).signum();
            assert!((a - b * sign).norm() < 1e-12);
            assert!(rr[(j, j)] > 0.0);
        }
        assert!((&q.combine(&rr) - &x).frobenius_norm() < 1e-12 * x.frobenius_norm());
    }

    #[test]
    fn cholesky_qr_ill_conditioned() {
        // Condition number ~1e6 via column scaling.
        let mut r = rng(5);
        let mut x = BlockVectors::<f64>::random(40, 6, &mut r);
        x.scale_columns(&[1.0, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]);
        let (q, _) = cholesky_qr(&x).unwrap();
        assert!(orthonormality_loss(&q) < 1e-10 * 6f64.sqrt());
    }

    #[test]
    fn cholesky_qr_breakdown_reports_column() {
        let mut x = BlockVectors::<f64>::random(6, 3, &mut rng(2));
        let c0 = x.column(0);
        x.set_columns(2, &c0);
        match cholesky_qr(&x) {
            Err(EigenError::RankDeficiency { column }) => assert_eq!(column, 2),
            other => panic!("expected breakdown, got {other:?}"),
        }
    }

    #[test]
    fn taylor_exact_input_unchanged() {
        let x = BlockVectors::<f64>::unit_columns(4, &[0, 2]);
        assert_eq!(taylor_polar_orth(&x, 4).unwrap(), x);
    }

    #[test]
    fn taylor_scalar_series() {
        let eps = 1e-3;
        let x = BlockVectors::<f64>::from_fn(3, 1, |i, _| if i == 0 { 1.0 + eps } else { 0.0 });
        let out = taylor_polar_orth(&x, 2).unwrap();
        // Scalar oracle: (1 + eps) * (1 - y/2 + 3y^2/8), y = (1 + eps)^2 - 1.
        let y = (1.0 + eps) * (1.0 + eps) - 1.0;
        let expected = (1.0 + eps) * (1.0 - y / 2.0 + 3.0 * y * y / 8.0);
        assert!((out.as_matrix()[(0, 0)] - expected).abs() < 1e-15);
        assert!((out.frobenius_norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn taylor_rejects_far_from_orthonormal() {
        let x = BlockVectors::<f64>::from_fn(2, 1, |i, _| if i == 0 { 1.2 } else { 0.0 });
        assert!(matches!(
            taylor_polar_orth(&x, 4),
            Err(EigenError::Applicability { .. })
        ));
    }

    #[test]
    fn taylor_matches_exact_polar_factor() {
        let mut r = rng(20);
        let (q, _) = cholesky_qr(&BlockVectors::<f64>::random(20, 5, &mut r)).unwrap();
        // Perturb to |Y|_F = 0.02 by mixing with a symmetric 5x5 matrix.
        let s = DenseMatrix::<f64>::from_fn(5, 5, |i, j| ((i + 2 * j) as f64).sin());
        let s = hermitian_part(&s);
        let s = &s * (0.01 / s.norm());
        let x = q.combine(&(DenseMatrix::identity(5, 5) + s));
        let loss = orthonormality_loss(&x);
        assert!((loss - 0.02).abs() < 1e-3, "loss {loss}");

        let out = taylor_polar_orth(&x, 4).unwrap();
        assert!(orthonormality_loss(&out) < 1e-6);

        // Exact polar factor through the eigendecomposition of X* X.
        let g = block_inner(&x, &x).unwrap();
        let eig = nalgebra::SymmetricEigen::new(g);
        let inv_sqrt = &eig.eigenvectors
            * DenseMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()))
            * eig.eigenvectors.transpose();
        let polar = x.combine(&inv_sqrt);
        assert!((&out - &polar).frobenius_norm() < 1e-6);
    }
}
