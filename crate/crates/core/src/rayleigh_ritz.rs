//! Subspace residuals, Rayleigh-Ritz extraction and convergence metrics.

use crate::block::{block_inner, BlockVectors};
use crate::error::{check_dim, Result};
use crate::field::Field;
use crate::operator::HermitianOperator;
use crate::pencil::{solve_pencil, SmallPencil};

/// Guards the denominators of the relative metrics.
pub const METRIC_DENOMINATOR_FLOOR: f64 = 1e-300;

/// Ritz pairs extracted from a subspace, with `A * vectors` kept alongside.
#[derive(Clone, Debug)]
pub struct RitzResult<T: Field> {
    pub values: Vec<f64>,
    pub vectors: BlockVectors<T>,
    pub products: BlockVectors<T>,
    pub residual_norms: Vec<f64>,
}

impl<T: Field> RitzResult<T> {
    /// `A X - X diag(values)`.
    pub fn residuals(&self) -> BlockVectors<T> {
        let mut r = self.products.clone();
        let x = self.vectors.as_matrix();
        for (j, &theta) in self.values.iter().enumerate() {
            let mut col = r.as_matrix_mut().column_mut(j);
            col.axpy(T::from_real(-theta), &x.column(j), T::one());
        }
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceMetrics {
    pub rel_subspace_residual: f64,
    pub trace_value: f64,
    pub rel_trace_change: f64,
}

/// `A X - X (X* A X)` given the product `AX`.
pub fn subspace_residual<T: Field>(x: &BlockVectors<T>, ax: &BlockVectors<T>) -> Result<BlockVectors<T>> {
    check_dim("subspace_residual rows", x.nrows(), ax.nrows())?;
    check_dim("subspace_residual columns", x.ncols(), ax.ncols())?;
    let xax = block_inner(x, ax)?;
    Ok(ax - &x.combine(&xax))
}

/// Rayleigh-Ritz over the basis `s`, applying the operator once to it.
pub fn rayleigh_ritz<T: Field, A: HermitianOperator<T> + ?Sized>(
    a: &A,
    s: &BlockVectors<T>,
    want: usize,
) -> Result<RitzResult<T>> {
    check_dim("rayleigh_ritz basis rows", a.dim(), s.nrows())?;
    let as_ = a.apply(s)?;
    rayleigh_ritz_with_products(s, &as_, want)
}

/// Rayleigh-Ritz over `s` when `A s` is already available.
pub fn rayleigh_ritz_with_products<T: Field>(
    s: &BlockVectors<T>,
    as_: &BlockVectors<T>,
    want: usize,
) -> Result<RitzResult<T>> {
    check_dim("rayleigh_ritz product rows", s.nrows(), as_.nrows())?;
    check_dim("rayleigh_ritz product columns", s.ncols(), as_.ncols())?;
    let pencil = SmallPencil::new(block_inner(s, as_)?, block_inner(s, s)?)?;
    let sol = solve_pencil(&pencil, want)?;
    let vectors = s.combine(&sol.c);
    let products = as_.combine(&sol.c);
    let mut ritz = RitzResult {
        values: sol.omega,
        vectors,
        products,
        residual_norms: Vec::new(),
    };
    ritz.residual_norms = ritz.residuals().column_norms();
    Ok(ritz)
}

/// Relative subspace residual, trace and relative trace change of `X`.
pub fn convergence_metrics<T: Field>(
    x: &BlockVectors<T>,
    ax: &BlockVectors<T>,
    prev_trace: Option<f64>,
) -> Result<ConvergenceMetrics> {
    check_dim("convergence_metrics rows", x.nrows(), ax.nrows())?;
    check_dim("convergence_metrics columns", x.ncols(), ax.ncols())?;
    let xax = block_inner(x, ax)?;
    let residual = ax - &x.combine(&xax);
    let trace_value: f64 = (0..xax.nrows()).map(|i| xax[(i, i)].real()).sum();
    let rel_subspace_residual = residual.frobenius_norm() / xax.norm().max(METRIC_DENOMINATOR_FLOOR);
    let rel_trace_change = match prev_trace {
        Some(prev) => (trace_value - prev).abs() / trace_value.abs().max(METRIC_DENOMINATOR_FLOOR),
        None => f64::INFINITY,
    };
    Ok(ConvergenceMetrics {
        rel_subspace_residual,
        trace_value,
        rel_trace_change,
    })
}

/// Leading run of converged Ritz pairs: `j` qualifies when its residual norm
/// is at most `tol * max(|theta_j|, 1)` and every earlier pair qualifies.
pub fn detect_converged<T: Field>(ritz: &RitzResult<T>, tol: f64) -> Vec<usize> {
    converged_prefix(&ritz.values, &ritz.residual_norms, tol)
}

pub(crate) fn converged_prefix(values: &[f64], residual_norms: &[f64], tol: f64) -> Vec<usize> {
    values
        .iter()
        .zip(residual_norms)
        .take_while(|(theta, r)| **r <= tol * theta.abs().max(1.0))
        .enumerate()
        .map(|(j, _)| j)
        .collect()
}
