//! The projected preconditioned conjugate gradient solver.

mod options;
mod partition;
mod state;
mod update;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use options::{default_nbuf, OrthPolicy, OrthScheme, Projection, SolverOptions, DEFAULT_RR_PERIOD, DEFAULT_SBSIZE, DEFAULT_TAYLOR_TERMS};
pub use partition::split_blocks;
pub use state::{lock_and_compact, SolverState};
pub use update::{block_update, fallback_steepest_descent, SubblockInput, SubblockUpdate, UpdateKind, COEFF_RANK_TOL};

use crate::block::{block_inner, cholesky_qr, orthonormality_loss, project_out, taylor_polar_factor, upper_triangular_inverse, BlockVectors};
use crate::common::{independent_basis, initial_block, is_converged, lock_tolerance, CountingOperator, TraceRecorder};
use crate::error::{check_dim, EigenError, Result};
use crate::field::Field;
use crate::operator::{HermitianOperator, Preconditioner};
use crate::rayleigh_ritz::{rayleigh_ritz_with_products, subspace_residual, RitzResult};
use crate::report::{SolveReport, SolveStatus};

/// Relative mismatch between the recurrence-updated `AX` and a fresh product
/// above which the conjugate directions are discarded at a Rayleigh-Ritz step.
pub const PRODUCT_DRIFT_TOL: f64 = 1e-6;

/// Computes the `opts.k` smallest eigenpairs of `a`.
///
/// `x0` may supply up to `k + nbuf` starting columns; the rest are seeded
/// random. Running out of iterations is reported through the status, not as
/// an error.
pub fn ppcg_solve<T, A, P>(a: &A, t: &P, x0: Option<&BlockVectors<T>>, opts: &SolverOptions) -> Result<SolveReport<T>>
where
    T: Field,
    A: HermitianOperator<T> + ?Sized,
    P: Preconditioner<T> + ?Sized,
{
    opts.validate()?;
    let n = a.dim();
    let mut op = CountingOperator::new(a);
    let x = initial_block(n, opts.width(), x0, opts.seed)?;
    let ax = op.apply(&x)?;
    let w = subspace_residual(&x, &ax)?;
    let mut state = SolverState::new(x, ax, w, opts.sbsize);
    let mut recorder = TraceRecorder::new();
    let mut rr_solves = 0;
    let mut breakdowns = 0;
    let mut ritz_values = None;
    let mut converged = false;

    for step in 0..opts.max_iter {
        let (lead, a_lead) = state.leading(opts.k);
        let orth_loss = Some(orthonormality_loss(&state.x));
        let metrics = recorder.record(&lead, &a_lead, state.n_locked(), op.count(), orth_loss, ritz_values.take())?;
        if state.k_act() == 0 || is_converged(&metrics, opts.tol, opts.trace_tol) {
            converged = true;
            break;
        }
        if step + 1 == opts.max_iter {
            break;
        }
        state.iter = step + 1;
        let out = iterate(state, &mut op, t, opts)?;
        state = out.state;
        breakdowns += out.breakdowns;
        if let Some(values) = out.ritz_values {
            rr_solves += 1;
            ritz_values = Some(values);
        }
    }

    let ritz = final_rayleigh_ritz(&state, &mut op)?;
    rr_solves += 1;
    let k = opts.k;
    let status = match (converged, breakdowns) {
        (false, _) => SolveStatus::MaxIter,
        (true, 0) => SolveStatus::Converged,
        (true, b) => SolveStatus::BreakdownRecovered(b),
    };
    Ok(SolveReport {
        values: ritz.values[..k].to_vec(),
        vectors: ritz.vectors.columns(0..k),
        residual_norms: ritz.residual_norms[..k].to_vec(),
        trace: recorder.trace,
        status,
        matvecs: op.count(),
        rr_solves,
        breakdowns,
    })
}

struct StepOutcome<T: Field> {
    state: SolverState<T>,
    breakdowns: usize,
    ritz_values: Option<Vec<f64>>,
}

/// One outer iteration: the subblock sweep followed by either a
/// Rayleigh-Ritz step with locking or orthonormalization.
fn iterate<T, A, P>(
    mut state: SolverState<T>,
    op: &mut CountingOperator<'_, T, A>,
    t: &P,
    opts: &SolverOptions,
) -> Result<StepOutcome<T>>
where
    T: Field,
    A: HermitianOperator<T> + ?Sized,
    P: Preconditioner<T> + ?Sized,
{
    let w = t.apply(&state.w)?;
    check_dim("preconditioner output rows", state.w.nrows(), w.nrows())?;
    check_dim("preconditioner output columns", state.w.ncols(), w.ncols())?;
    let p = state.p.take();
    let (w, p) = project_directions(&state, w, p, opts.projection)?;
    let aw = op.apply(&w)?;

    let inputs: Vec<SubblockInput<T>> = state
        .partition
        .iter()
        .map(|r| SubblockInput {
            x: state.x.columns(r.clone()),
            ax: state.ax.columns(r.clone()),
            w: w.columns(r.clone()),
            aw: aw.columns(r.clone()),
            p: p.as_ref().map(|(p, ap)| (p.columns(r.clone()), ap.columns(r.clone()))),
        })
        .collect();
    let updates: Vec<SubblockUpdate<T>> = inputs.par_iter().map(block_update).collect::<Result<_>>()?;
    let mut breakdowns = updates.iter().filter(|u| u.kind == UpdateKind::SteepestDescent).count();

    let (n, k_act) = (state.x.nrows(), state.k_act());
    let mut next = Assembled {
        x: BlockVectors::zeros(n, k_act),
        ax: BlockVectors::zeros(n, k_act),
        p: BlockVectors::zeros(n, k_act),
        ap: BlockVectors::zeros(n, k_act),
    };
    for (r, u) in state.partition.iter().zip(&updates) {
        next.install(r.start, u);
    }
    let orth_loss = orthonormality_loss(&next.x);

    let rr_step = opts.rr_period.is_some_and(|r| state.iter % r == 0);
    if rr_step {
        let fresh = op.apply(&next.x)?;
        let drift = (&fresh - &next.ax).frobenius_norm() / fresh.frobenius_norm().max(f64::MIN_POSITIVE);
        next.ax = fresh;
        // AP follows the same recurrences as AX, so drift in one means the
        // other can no longer be trusted either.
        if !(drift <= PRODUCT_DRIFT_TOL) {
            log::warn!("operator products drifted by {drift:.2e} at iteration {}; dropping conjugate directions", state.iter);
            next.p = BlockVectors::zeros(n, k_act);
            next.ap = BlockVectors::zeros(n, k_act);
        }
        let ritz = match ritz_over(&state, &next) {
            Err(EigenError::SingularGram { .. }) => {
                rebuild_block(&mut next, &state.x_lock, op, opts.seed ^ state.iter as u64)?;
                breakdowns += 1;
                ritz_over(&state, &next)?
            }
            other => other?,
        };
        let lock_tol = lock_tolerance(&ritz.values, opts.k, opts.tol);
        state.x = next.x;
        state.ax = next.ax;
        state.p = Some((next.p, next.ap));
        let values = ritz.values.clone();
        let state = lock_and_compact(state, &ritz, lock_tol);
        return Ok(StepOutcome {
            state,
            breakdowns,
            ritz_values: Some(values),
        });
    }

    if should_orthonormalize(opts.orth_policy, state.iter, orth_loss) {
        match orthonormalize(&mut next, &state.partition, &inputs, opts.orth_scheme) {
            Ok(redone) => breakdowns += redone,
            Err(EigenError::RankDeficiency { column }) => {
                log::warn!("block lost rank at column {column} in iteration {}; rebuilding it", state.iter);
                rebuild_block(&mut next, &state.x_lock, op, opts.seed ^ state.iter as u64)?;
                breakdowns += 1;
            }
            Err(e) => return Err(e),
        }
    }
    state.w = subspace_residual(&next.x, &next.ax)?;
    state.x = next.x;
    state.ax = next.ax;
    state.p = Some((next.p, next.ap));
    Ok(StepOutcome {
        state,
        breakdowns,
        ritz_values: None,
    })
}

struct Assembled<T: Field> {
    x: BlockVectors<T>,
    ax: BlockVectors<T>,
    p: BlockVectors<T>,
    ap: BlockVectors<T>,
}

impl<T: Field> Assembled<T> {
    fn install(&mut self, start: usize, u: &SubblockUpdate<T>) {
        self.x.set_columns(start, &u.x);
        self.ax.set_columns(start, &u.ax);
        self.p.set_columns(start, &u.p);
        self.ap.set_columns(start, &u.ap);
    }
}

fn ritz_over<T: Field>(state: &SolverState<T>, next: &Assembled<T>) -> Result<RitzResult<T>> {
    let s = BlockVectors::hstack(&[&state.x_lock, &next.x])?;
    let as_ = BlockVectors::hstack(&[&state.ax_lock, &next.ax])?;
    rayleigh_ritz_with_products(&s, &as_, state.width())
}

/// Last resort once the active block has lost rank: keeps an orthonormal
/// basis of its independent columns, refills the rest with seeded random
/// columns orthogonal to everything kept, and drops the conjugate
/// directions.
fn rebuild_block<T, A>(
    next: &mut Assembled<T>,
    x_lock: &BlockVectors<T>,
    op: &mut CountingOperator<'_, T, A>,
    seed: u64,
) -> Result<()>
where
    T: Field,
    A: HermitianOperator<T> + ?Sized,
{
    let (n, k_act) = (next.x.nrows(), next.x.ncols());
    let (mut q, mut aq) = independent_basis(&next.x, &next.ax);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while q.ncols() < k_act {
        let pad = BlockVectors::random(n, k_act - q.ncols(), &mut rng);
        let pad = project_out(x_lock, &project_out(&q, &pad)?)?;
        let pad = project_out(x_lock, &project_out(&q, &pad)?)?;
        let (pad, _) = independent_basis(&pad, &pad);
        let a_pad = op.apply(&pad)?;
        q = BlockVectors::hstack(&[&q, &pad])?;
        aq = BlockVectors::hstack(&[&aq, &a_pad])?;
    }
    next.x = q;
    next.ax = aq;
    next.p = BlockVectors::zeros(n, k_act);
    next.ap = BlockVectors::zeros(n, k_act);
    Ok(())
}

/// Projects the preconditioned residuals `w` and the conjugate directions
/// `p` (with their products) against the locked columns, and against the
/// active block `X` where `projection` asks for it.
pub fn project_directions<T: Field>(
    state: &SolverState<T>,
    w: BlockVectors<T>,
    p: Option<(BlockVectors<T>, BlockVectors<T>)>,
    projection: Projection,
) -> Result<(BlockVectors<T>, Option<(BlockVectors<T>, BlockVectors<T>)>)> {
    let mut w = w;
    if projection.w {
        w = project_out(&state.x, &w)?;
    }
    w = project_out(&state.x_lock, &w)?;
    let p = match p {
        Some((p, ap)) => {
            let (p, ap) = if projection.p {
                project_pair(&state.x, &state.ax, p, ap)?
            } else {
                (p, ap)
            };
            Some(project_pair(&state.x_lock, &state.ax_lock, p, ap)?)
        }
        None => None,
    };
    Ok((w, p))
}

// (I - Q Q*) P, with A P corrected by the same combination.
fn project_pair<T: Field>(
    q: &BlockVectors<T>,
    aq: &BlockVectors<T>,
    p: BlockVectors<T>,
    ap: BlockVectors<T>,
) -> Result<(BlockVectors<T>, BlockVectors<T>)> {
    if q.is_empty() {
        return Ok((p, ap));
    }
    let coeff = block_inner(q, &p)?;
    Ok((&p - &q.combine(&coeff), &ap - &aq.combine(&coeff)))
}

fn should_orthonormalize(policy: OrthPolicy, iter: usize, loss: f64) -> bool {
    match policy {
        OrthPolicy::EveryIteration => true,
        OrthPolicy::EveryT(t) => iter % t == 0,
        OrthPolicy::Adaptive(threshold) => loss >= threshold,
    }
}

/// Orthonormalizes the assembled block in place and returns the number of
/// subblocks that had to be redone by steepest descent.
///
/// A Cholesky breakdown is blamed on the subblock holding the failing
/// column; that subblock is recomputed without its conjugate directions and
/// the factorization retried.
fn orthonormalize<T: Field>(
    next: &mut Assembled<T>,
    partition: &[std::ops::Range<usize>],
    inputs: &[SubblockInput<T>],
    scheme: OrthScheme,
) -> Result<usize> {
    if let OrthScheme::TaylorPolar(terms) = scheme {
        match taylor_polar_factor(&next.x, terms) {
            Ok(m) => {
                next.x = next.x.combine(&m);
                next.ax = next.ax.combine(&m);
                return Ok(0);
            }
            Err(EigenError::Applicability { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let mut redone = vec![false; partition.len()];
    loop {
        match cholesky_qr(&next.x) {
            Ok((q, r)) => {
                next.ax = next.ax.combine(&upper_triangular_inverse(&r));
                next.x = q;
                return Ok(redone.iter().filter(|&&b| b).count());
            }
            Err(EigenError::RankDeficiency { column }) => {
                let b = partition
                    .iter()
                    .position(|r| r.contains(&column))
                    .ok_or(EigenError::RankDeficiency { column })?;
                if redone[b] {
                    return Err(EigenError::RankDeficiency { column });
                }
                log::warn!("cholesky breakdown at column {column}; redoing subblock {b} by steepest descent");
                redone[b] = true;
                let u = fallback_steepest_descent(&inputs[b])?;
                next.install(partition[b].start, &u);
            }
            Err(e) => return Err(e),
        }
    }
}

/// Rayleigh-Ritz over `[X_lock, X]` with a freshly applied operator on the
/// active columns.
fn final_rayleigh_ritz<T, A>(state: &SolverState<T>, op: &mut CountingOperator<'_, T, A>) -> Result<RitzResult<T>>
where
    T: Field,
    A: HermitianOperator<T> + ?Sized,
{
    let ax = op.apply(&state.x)?;
    let s = BlockVectors::hstack(&[&state.x_lock, &state.x])?;
    let as_ = BlockVectors::hstack(&[&state.ax_lock, &ax])?;
    rayleigh_ritz_with_products(&s, &as_, state.width())
}
