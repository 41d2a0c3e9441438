//! Plumbing shared by all solvers: initial guesses, matvec accounting,
//! trace recording and the lock tolerance.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::block::{adjoint_mul, cholesky_qr, hermitian_part, upper_triangular_inverse, BlockVectors, DenseMatrix};
use crate::error::{check_dim, EigenError, Result};
use crate::field::Field;
use crate::operator::HermitianOperator;
use crate::rayleigh_ritz::{convergence_metrics, ConvergenceMetrics};
use crate::report::{ConvergenceTrace, TraceRecord};

/// Orthonormal starting block of `width` columns: the columns of `x0` (if
/// any) followed by seeded standard normal columns.
pub fn initial_block<T: Field>(
    n: usize,
    width: usize,
    x0: Option<&BlockVectors<T>>,
    seed: u64,
) -> Result<BlockVectors<T>> {
    if width > n {
        return Err(EigenError::InvalidOptions(format!(
            "block width {width} exceeds problem dimension {n}"
        )));
    }
    let given = match x0 {
        Some(x) => {
            check_dim("initial guess rows", n, x.nrows())?;
            if x.ncols() > width {
                return Err(EigenError::InvalidOptions(format!(
                    "initial guess has {} columns, at most {width} allowed",
                    x.ncols()
                )));
            }
            if !x.is_finite() {
                return Err(EigenError::InvalidOptions("initial guess has non-finite entries".into()));
            }
            x.clone()
        }
        None => BlockVectors::zeros(n, 0),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pad = BlockVectors::random(n, width - given.ncols(), &mut rng);
    let full = BlockVectors::hstack(&[&given, &pad])?;
    Ok(cholesky_qr(&full)?.0)
}

/// Applies the operator and counts columns.
pub(crate) struct CountingOperator<'a, T: Field, A: HermitianOperator<T> + ?Sized> {
    inner: &'a A,
    count: usize,
    _field: std::marker::PhantomData<T>,
}

impl<'a, T: Field, A: HermitianOperator<T> + ?Sized> CountingOperator<'a, T, A> {
    pub fn new(inner: &'a A) -> Self {
        Self {
            inner,
            count: 0,
            _field: std::marker::PhantomData,
        }
    }

    pub fn apply(&mut self, x: &BlockVectors<T>) -> Result<BlockVectors<T>> {
        if x.is_empty() {
            return Ok(BlockVectors::zeros(x.nrows(), 0));
        }
        let out = self.inner.apply(x)?;
        check_dim("operator output rows", x.nrows(), out.nrows())?;
        check_dim("operator output columns", x.ncols(), out.ncols())?;
        self.count += x.ncols();
        Ok(out)
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

pub(crate) struct TraceRecorder {
    start: Instant,
    prev_trace: Option<f64>,
    pub trace: ConvergenceTrace,
}

impl TraceRecorder {
    pub fn new() -> Self {
        Self {
            start: Instant::now(),
            prev_trace: None,
            trace: ConvergenceTrace::default(),
        }
    }

    /// Computes metrics over the leading block and appends a record.
    pub fn record<T: Field>(
        &mut self,
        lead: &BlockVectors<T>,
        a_lead: &BlockVectors<T>,
        n_locked: usize,
        n_matvec: usize,
        orth_loss: Option<f64>,
        ritz_values: Option<Vec<f64>>,
    ) -> Result<ConvergenceMetrics> {
        let metrics = convergence_metrics(lead, a_lead, self.prev_trace)?;
        if let Some(prev) = self.prev_trace {
            if metrics.trace_value > prev + 1e-12 * prev.abs().max(1.0) {
                log::debug!(
                    "trace increased at iteration {}: {prev:.12e} -> {:.12e}",
                    self.trace.len(),
                    metrics.trace_value
                );
            }
        }
        self.prev_trace = Some(metrics.trace_value);
        self.trace.records.push(TraceRecord {
            iter: self.trace.len(),
            trace_value: metrics.trace_value,
            rel_resid: metrics.rel_subspace_residual,
            rel_trace_change: metrics.rel_trace_change,
            n_locked,
            n_matvec,
            wall_ms: self.start.elapsed().as_secs_f64() * 1e3,
            orth_loss,
            ritz_values,
        });
        Ok(metrics)
    }
}

pub(crate) fn is_converged(metrics: &ConvergenceMetrics, tol: f64, trace_tol: Option<f64>) -> bool {
    metrics.rel_subspace_residual <= tol || trace_tol.is_some_and(|t| metrics.rel_trace_change < t)
}

/// Per-pair tolerance handed to `detect_converged`.
///
/// Chosen so that locked pairs alone can never hold the relative subspace
/// residual of the `k` leading columns above `tol`: each locked residual is
/// at most `tol * |Lambda_k|_F / (2 sqrt(k))`.
pub(crate) fn lock_tolerance(values: &[f64], k: usize, tol: f64) -> f64 {
    let lead = &values[..k.min(values.len())];
    if lead.is_empty() {
        return 0.0;
    }
    let frob = lead.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = lead.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    0.5 * tol * frob / ((lead.len() as f64).sqrt() * scale)
}

/// Orthonormal basis of the range of `v` with the matching products `A v`.
///
/// Columns whose component orthogonal to the previously kept ones falls below
/// `1e-6` of their norm are dropped, so the result may have fewer columns.
pub(crate) fn independent_basis<T: Field>(
    v: &BlockVectors<T>,
    av: &BlockVectors<T>,
) -> (BlockVectors<T>, BlockVectors<T>) {
    const DROP: f64 = 1e-12;
    let g = hermitian_part(&adjoint_mul(v.as_matrix(), v.as_matrix()));
    let m = g.nrows();
    let mut kept: Vec<usize> = Vec::with_capacity(m);
    // Rows of R for kept columns, indexed by original column.
    let mut r = DenseMatrix::<T>::zeros(m, m);
    for j in 0..m {
        let gjj = g[(j, j)].real();
        if !(gjj > f64::MIN_POSITIVE) || !gjj.is_finite() {
            continue;
        }
        let mut d = gjj;
        for (row, &kcol) in kept.iter().enumerate() {
            let mut s = g[(kcol, j)];
            for (prev_row, _) in kept.iter().enumerate().take(row) {
                s -= r[(prev_row, kcol)].conjugate() * r[(prev_row, j)];
            }
            let rij = s / r[(row, kcol)];
            r[(row, j)] = rij;
            d -= rij.modulus_squared();
        }
        if d > DROP * gjj {
            let row = kept.len();
            r[(row, j)] = T::from_real(d.sqrt());
            kept.push(j);
        }
    }
    let p = kept.len();
    let n = v.nrows();
    if p == 0 {
        return (BlockVectors::zeros(n, 0), BlockVectors::zeros(n, 0));
    }
    let r_kept = DenseMatrix::from_fn(p, p, |i, j| if i <= j { r[(i, kept[j])] } else { T::zero() });
    let rinv = upper_triangular_inverse(&r_kept);
    let basis = v.select_columns(&kept).combine(&rinv);
    let a_basis = av.select_columns(&kept).combine(&rinv);

    // Second pass restores orthonormality lost to conditioning.
    match cholesky_qr(&basis) {
        Ok((q, r2)) => {
            let r2inv = upper_triangular_inverse(&r2);
            (q, a_basis.combine(&r2inv))
        }
        Err(_) => (basis, a_basis),
    }
}
