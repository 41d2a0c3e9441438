use crate::block::{block_inner, hermitian_part, project_out, BlockVectors, DenseMatrix};
use crate::common::{independent_basis, initial_block, is_converged, lock_tolerance, CountingOperator, TraceRecorder};
use crate::error::{check_dim, Result};
use crate::field::Field;
use crate::operator::{HermitianOperator, Preconditioner};
use crate::pencil::hermitian_eigh;
use crate::rayleigh_ritz::{detect_converged, RitzResult};
use crate::report::{SolveReport, SolveStatus};

use super::BaselineOptions;

/// Orthonormal search space with its products and projected matrix.
struct SearchSpace<T: Field> {
    v: BlockVectors<T>,
    av: BlockVectors<T>,
    h: DenseMatrix<T>,
}

impl<T: Field> SearchSpace<T> {
    fn new(v: BlockVectors<T>, av: BlockVectors<T>) -> Result<Self> {
        let h = hermitian_part(&block_inner(&v, &av)?);
        Ok(Self { v, av, h })
    }

    fn dim(&self) -> usize {
        self.v.ncols()
    }

    /// Appends an orthonormal block `w` that is orthogonal to `v`.
    fn extend(&mut self, w: &BlockVectors<T>, aw: &BlockVectors<T>) -> Result<()> {
        let (m, mw) = (self.dim(), w.ncols());
        let vaw = block_inner(&self.v, aw)?;
        let waw = hermitian_part(&block_inner(w, aw)?);
        let mut h = DenseMatrix::zeros(m + mw, m + mw);
        h.view_mut((0, 0), (m, m)).copy_from(&self.h);
        h.view_mut((0, m), (m, mw)).copy_from(&vaw);
        h.view_mut((m, 0), (mw, m)).copy_from(&vaw.adjoint());
        h.view_mut((m, m), (mw, mw)).copy_from(&waw);
        self.h = h;
        self.v = BlockVectors::hstack(&[&self.v, w])?;
        self.av = BlockVectors::hstack(&[&self.av, aw])?;
        Ok(())
    }

    fn ritz(&self, want: usize) -> Result<RitzResult<T>> {
        let (values, y) = hermitian_eigh(&self.h)?;
        let y = y.columns(0, want).into_owned();
        let mut ritz = RitzResult {
            values: values[..want].to_vec(),
            vectors: self.v.combine(&y),
            products: self.av.combine(&y),
            residual_norms: Vec::new(),
        };
        ritz.residual_norms = ritz.residuals().column_norms();
        Ok(ritz)
    }
}

/// Block Davidson-Liu: the search space grows by the preconditioned
/// residuals of the unconverged Ritz pairs and is restarted from the
/// current Ritz vectors when it would exceed its cap.
pub fn davidson_solve<T, A, P>(a: &A, t: &P, x0: Option<&BlockVectors<T>>, opts: &BaselineOptions) -> Result<SolveReport<T>>
where
    T: Field,
    A: HermitianOperator<T> + ?Sized,
    P: Preconditioner<T> + ?Sized,
{
    run(a, t, x0, opts).map(|(report, _)| report)
}

// Also returns the largest search space dimension reached.
fn run<T, A, P>(a: &A, t: &P, x0: Option<&BlockVectors<T>>, opts: &BaselineOptions) -> Result<(SolveReport<T>, usize)>
where
    T: Field,
    A: HermitianOperator<T> + ?Sized,
    P: Preconditioner<T> + ?Sized,
{
    opts.validate()?;
    let n = a.dim();
    let width = opts.width();
    let cap = opts.restart_dim_multiple * width;
    let mut op = CountingOperator::new(a);
    let v = initial_block(n, width, x0, opts.seed)?;
    let av = op.apply(&v)?;
    let mut space = SearchSpace::new(v, av)?;
    let mut ritz = space.ritz(width)?;
    let mut max_dim = space.dim();
    let mut rr_solves = 1;
    let mut recorder = TraceRecorder::new();
    let mut converged = false;

    for step in 0..opts.max_iter {
        // Row 0 describes the initial guess itself, as for the other solvers.
        let (lead, a_lead) = if step == 0 {
            (space.v.columns(0..opts.k), space.av.columns(0..opts.k))
        } else {
            (ritz.vectors.columns(0..opts.k), ritz.products.columns(0..opts.k))
        };
        let n_lock = detect_converged(&ritz, lock_tolerance(&ritz.values, opts.k, opts.tol)).len();
        let metrics = recorder.record(&lead, &a_lead, n_lock, op.count(), None, Some(ritz.values.clone()))?;
        if n_lock == width || is_converged(&metrics, opts.tol, None) {
            converged = true;
            break;
        }
        if step + 1 == opts.max_iter {
            break;
        }

        let r = ritz.residuals().columns(n_lock..width);
        let w = t.apply(&r)?;
        check_dim("preconditioner output columns", r.ncols(), w.ncols())?;
        if space.dim() + w.ncols() > cap {
            space = SearchSpace::new(ritz.vectors.clone(), ritz.products.clone())?;
        }
        // Twice is enough to keep the basis orthonormal to working accuracy.
        let w = project_out(&space.v, &project_out(&space.v, &w)?)?;
        let (w, _) = independent_basis(&w, &w);
        if w.is_empty() {
            log::warn!("davidson search space stopped growing at iteration {step}");
            break;
        }
        let aw = op.apply(&w)?;
        space.extend(&w, &aw)?;
        max_dim = max_dim.max(space.dim());
        ritz = space.ritz(width)?;
        rr_solves += 1;
    }

    let k = opts.k;
    let report = SolveReport {
        values: ritz.values[..k].to_vec(),
        vectors: ritz.vectors.columns(0..k),
        residual_norms: ritz.residual_norms[..k].to_vec(),
        trace: recorder.trace,
        status: if converged { SolveStatus::Converged } else { SolveStatus::MaxIter },
        matvecs: op.count(),
        rr_solves,
        breakdowns: 0,
    };
    Ok((report, max_dim))
}
