use crate::block::{block_inner, project_out, BlockVectors};
use crate::common::{independent_basis, initial_block, is_converged, lock_tolerance, CountingOperator, TraceRecorder};
use crate::error::{check_dim, EigenError, Result};
use crate::field::Field;
use crate::operator::{HermitianOperator, Preconditioner};
use crate::pencil::{solve_pencil, PencilSolution, SmallPencil};
use crate::rayleigh_ritz::{converged_prefix, rayleigh_ritz_with_products, subspace_residual};
use crate::report::{SolveReport, SolveStatus};

use super::BaselineOptions;

/// LOBPCG with soft locking: every iteration is a Rayleigh-Ritz solve over
/// `[X, W, P]`, where `W` and `P` hold the directions of the unconverged
/// columns only.
pub fn lobpcg_solve<T, A, P>(a: &A, t: &P, x0: Option<&BlockVectors<T>>, opts: &BaselineOptions) -> Result<SolveReport<T>>
where
    T: Field,
    A: HermitianOperator<T> + ?Sized,
    P: Preconditioner<T> + ?Sized,
{
    opts.validate()?;
    let n = a.dim();
    let width = opts.width();
    let mut op = CountingOperator::new(a);
    let mut x = initial_block(n, width, x0, opts.seed)?;
    let mut ax = op.apply(&x)?;
    let mut w = subspace_residual(&x, &ax)?;
    let mut p: Option<(BlockVectors<T>, BlockVectors<T>)> = None;
    let mut values: Option<Vec<f64>> = None;
    let mut n_lock = 0;
    let mut rr_solves = 0;
    let mut recorder = TraceRecorder::new();
    let mut converged = false;

    for step in 0..opts.max_iter {
        let metrics = recorder.record(
            &x.columns(0..opts.k),
            &ax.columns(0..opts.k),
            n_lock,
            op.count(),
            None,
            values.clone(),
        )?;
        if n_lock == width || is_converged(&metrics, opts.tol, None) {
            converged = true;
            break;
        }
        if step + 1 == opts.max_iter {
            break;
        }

        let act = n_lock..width;
        let r = w.columns(act.clone());
        let tw = t.apply(&r)?;
        check_dim("preconditioner output columns", r.ncols(), tw.ncols())?;
        let tw = project_out(&x, &tw)?;
        let atw = op.apply(&tw)?;
        let (wb, awb) = independent_basis(&tw, &atw);
        let pb = p.take().map(|(p, ap)| {
            let coeff = block_inner(&x, &p).expect("row dimensions agree");
            let p = &p - &x.combine(&coeff);
            let ap = &ap - &ax.combine(&coeff);
            independent_basis(&p, &ap)
        });
        let pb = pb.filter(|(v, _)| !v.is_empty());
        if wb.is_empty() && pb.is_none() {
            log::warn!("lobpcg has no search directions left at iteration {step}");
            break;
        }

        let (sol, with_p) = match &pb {
            Some((pv, apv)) => match local_solve(&[&x, &wb, pv], &[&ax, &awb, apv], width) {
                Ok(sol) => (sol, true),
                Err(EigenError::SingularGram { .. }) => (local_solve(&[&x, &wb], &[&ax, &awb], width)?, false),
                Err(e) => return Err(e),
            },
            None => (local_solve(&[&x, &wb], &[&ax, &awb], width)?, false),
        };
        rr_solves += 1;

        let m = x.ncols();
        let mw = wb.ncols();
        let c = &sol.c;
        let cw = c.view((m, 0), (mw, width)).into_owned();
        let mut dir = wb.combine(&cw);
        let mut adir = awb.combine(&cw);
        if with_p {
            let (pv, apv) = pb.as_ref().expect("conjugate block present");
            let cp = c.view((m + mw, 0), (pv.ncols(), width)).into_owned();
            dir = &dir + &pv.combine(&cp);
            adir = &adir + &apv.combine(&cp);
        }
        let cx = c.rows(0, m).into_owned();
        x = &x.combine(&cx) + &dir;
        ax = &ax.combine(&cx) + &adir;
        w = ax.clone();
        for (j, &theta) in sol.omega.iter().enumerate() {
            w.as_matrix_mut().column_mut(j).axpy(T::from_real(-theta), &x.as_matrix().column(j), T::one());
        }
        let lock_tol = lock_tolerance(&sol.omega, opts.k, opts.tol);
        n_lock = converged_prefix(&sol.omega, &w.column_norms(), lock_tol).len();
        p = Some((dir.columns(n_lock..width), adir.columns(n_lock..width)));
        values = Some(sol.omega);
    }

    let ritz = rayleigh_ritz_with_products(&x, &ax, width)?;
    let k = opts.k;
    Ok(SolveReport {
        values: ritz.values[..k].to_vec(),
        vectors: ritz.vectors.columns(0..k),
        residual_norms: ritz.residual_norms[..k].to_vec(),
        trace: recorder.trace,
        status: if converged { SolveStatus::Converged } else { SolveStatus::MaxIter },
        matvecs: op.count(),
        rr_solves: rr_solves + 1,
        breakdowns: 0,
    })
}

fn local_solve<T: Field>(
    parts: &[&BlockVectors<T>],
    products: &[&BlockVectors<T>],
    want: usize,
) -> Result<PencilSolution<T>> {
    let s = BlockVectors::hstack(parts)?;
    let as_ = BlockVectors::hstack(products)?;
    let pencil = SmallPencil::new(block_inner(&s, &as_)?, block_inner(&s, &s)?)?;
    solve_pencil(&pencil, want)
}
