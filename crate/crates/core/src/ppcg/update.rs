//! The per-subblock minimization and its steepest-descent fallback.

use crate::block::{adjoint_mul, project_out, BlockVectors, DenseMatrix};
use crate::common::independent_basis;
use crate::error::{EigenError, Result};
use crate::field::Field;
use crate::pencil::{solve_pencil, PencilSolution, SmallPencil};

/// A subblock `X_j` with its search directions and cached operator products.
#[derive(Clone, Debug)]
pub struct SubblockInput<T: Field> {
    pub x: BlockVectors<T>,
    pub ax: BlockVectors<T>,
    pub w: BlockVectors<T>,
    pub aw: BlockVectors<T>,
    /// Conjugate directions and their products; absent on the first step.
    pub p: Option<(BlockVectors<T>, BlockVectors<T>)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpdateKind {
    /// Minimized over `[X_j, W_j, P_j]`.
    Full,
    /// `P_j` was absent or dropped as linearly dependent.
    WithoutP,
    /// Rank-deficient coefficients forced a step over `[X_j, W_j]` only.
    SteepestDescent,
    /// No usable search direction; `X_j` returned as is and the columns are
    /// treated as converged.
    PassThrough,
}

#[derive(Clone, Debug)]
pub struct SubblockUpdate<T: Field> {
    pub x: BlockVectors<T>,
    pub ax: BlockVectors<T>,
    pub p: BlockVectors<T>,
    pub ap: BlockVectors<T>,
    /// Ritz values of the local minimization.
    pub theta: Vec<f64>,
    pub kind: UpdateKind,
}

/// Smallest singular value of `C_X` below this fraction of the largest marks
/// the update as rank deficient.
pub const COEFF_RANK_TOL: f64 = 1e-14;

struct Basis<T: Field> {
    v: BlockVectors<T>,
    av: BlockVectors<T>,
}

fn local_pencil<T: Field>(x: &Basis<T>, extra: &[&Basis<T>], q: usize) -> Result<PencilSolution<T>> {
    let mut vs = vec![&x.v];
    let mut avs = vec![&x.av];
    for b in extra {
        vs.push(&b.v);
        avs.push(&b.av);
    }
    let s = BlockVectors::hstack(&vs)?;
    let as_ = BlockVectors::hstack(&avs)?;
    let pencil = SmallPencil::new(adjoint_mul(s.as_matrix(), as_.as_matrix()), adjoint_mul(s.as_matrix(), s.as_matrix()))?;
    solve_pencil(&pencil, q)
}

fn coefficients_rank_deficient<T: Field>(c: &DenseMatrix<T>, q: usize) -> bool {
    let cx = c.rows(0, q).into_owned();
    if q == 1 {
        return cx[(0, 0)].modulus() < COEFF_RANK_TOL * c.norm();
    }
    let sv = cx.singular_values();
    let max = sv.max();
    let min = sv.min();
    !(max > 0.0) || min < COEFF_RANK_TOL * max
}

fn rayleigh_quotients<T: Field>(x: &BlockVectors<T>, ax: &BlockVectors<T>) -> Vec<f64> {
    x.as_matrix()
        .column_iter()
        .zip(ax.as_matrix().column_iter())
        .map(|(xc, axc)| xc.dotc(&axc).real() / xc.norm_squared().max(f64::MIN_POSITIVE))
        .collect()
}

fn pass_through<T: Field>(input: &SubblockInput<T>) -> SubblockUpdate<T> {
    let (n, q) = (input.x.nrows(), input.x.ncols());
    SubblockUpdate {
        x: input.x.clone(),
        ax: input.ax.clone(),
        p: BlockVectors::zeros(n, q),
        ap: BlockVectors::zeros(n, q),
        theta: rayleigh_quotients(&input.x, &input.ax),
        kind: UpdateKind::PassThrough,
    }
}

/// Assembles `P_new = W C_W + P C_P` and `X_new = X C_X + P_new` from the
/// rows of `c` that belong to each part.
fn assemble<T: Field>(x: &Basis<T>, parts: &[&Basis<T>], sol: PencilSolution<T>, kind: UpdateKind) -> SubblockUpdate<T> {
    let q = x.v.ncols();
    let n = x.v.nrows();
    let c = &sol.c;
    let mut p = BlockVectors::zeros(n, q);
    let mut ap = BlockVectors::zeros(n, q);
    let mut row = q;
    for part in parts {
        let m = part.v.ncols();
        let coeff = c.rows(row, m).into_owned();
        p = &p + &part.v.combine(&coeff);
        ap = &ap + &part.av.combine(&coeff);
        row += m;
    }
    let cx = c.rows(0, q).into_owned();
    SubblockUpdate {
        x: &x.v.combine(&cx) + &p,
        ax: &x.av.combine(&cx) + &ap,
        p,
        ap,
        theta: sol.omega,
        kind,
    }
}

/// One subblock step: the `q` lowest Ritz pairs over `span{X_j, W_j, P_j}`.
///
/// Linearly dependent directions are dropped (all of `P_j` first, then the
/// offending columns of `W_j`) and the local problem is solved again. If the
/// coefficient block `C_X` comes out singular the step is redone by
/// [`fallback_steepest_descent`].
pub fn block_update<T: Field>(input: &SubblockInput<T>) -> Result<SubblockUpdate<T>> {
    let q = input.x.ncols();
    let xb = Basis {
        v: input.x.clone(),
        av: input.ax.clone(),
    };
    let (wv, awv) = independent_basis(&input.w, &input.aw);
    let wb = Basis { v: wv, av: awv };
    let pb = input.p.as_ref().map(|(p, ap)| {
        let (v, av) = independent_basis(p, ap);
        Basis { v, av }
    });
    let pb = pb.filter(|b| b.v.ncols() > 0);

    if wb.v.ncols() == 0 && pb.is_none() {
        return Ok(pass_through(input));
    }

    if let Some(pb) = pb.as_ref() {
        let parts = [&wb, pb];
        match local_pencil(&xb, &parts, q) {
            Ok(sol) => return finish(input, &xb, &parts, sol, UpdateKind::Full),
            Err(EigenError::SingularGram { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    if wb.v.ncols() == 0 {
        return Ok(pass_through(input));
    }
    match local_pencil(&xb, &[&wb], q) {
        Ok(sol) => return finish(input, &xb, &[&wb], sol, UpdateKind::WithoutP),
        Err(EigenError::SingularGram { .. }) => {}
        Err(e) => return Err(e),
    }
    // W_j is nearly inside span(X_j): keep only its orthogonal part.
    let (v, av) = project_out_pair(&xb, &wb)?;
    let (v, av) = independent_basis(&v, &av);
    let wb = Basis { v, av };
    if wb.v.ncols() == 0 {
        return Ok(pass_through(input));
    }
    let sol = local_pencil(&xb, &[&wb], q)?;
    finish(input, &xb, &[&wb], sol, UpdateKind::WithoutP)
}

// W - X (X* W) together with its product AW - AX (X* W).
fn project_out_pair<T: Field>(x: &Basis<T>, w: &Basis<T>) -> Result<(BlockVectors<T>, BlockVectors<T>)> {
    let coeff = adjoint_mul(x.v.as_matrix(), w.v.as_matrix());
    let v = project_out(&x.v, &w.v)?;
    let av = &w.av - &x.av.combine(&coeff);
    Ok((v, av))
}

fn finish<T: Field>(
    input: &SubblockInput<T>,
    xb: &Basis<T>,
    parts: &[&Basis<T>],
    sol: PencilSolution<T>,
    kind: UpdateKind,
) -> Result<SubblockUpdate<T>> {
    if coefficients_rank_deficient(&sol.c, xb.v.ncols()) {
        return fallback_steepest_descent(input);
    }
    Ok(assemble(xb, parts, sol, kind))
}

/// Minimization over `span{X_j, W_j}` only (the conjugate block excluded).
///
/// With an HPD preconditioner and nonzero residual columns the resulting
/// block has full rank. When `W_j` carries no usable direction the block
/// passes through unchanged and is reported as [`UpdateKind::PassThrough`].
pub fn fallback_steepest_descent<T: Field>(input: &SubblockInput<T>) -> Result<SubblockUpdate<T>> {
    let q = input.x.ncols();
    let xb = Basis {
        v: input.x.clone(),
        av: input.ax.clone(),
    };
    let (v, av) = independent_basis(&input.w, &input.aw);
    let mut wb = Basis { v, av };
    if wb.v.ncols() == 0 {
        return Ok(pass_through(input));
    }
    let sol = match local_pencil(&xb, &[&wb], q) {
        Ok(sol) => sol,
        Err(EigenError::SingularGram { .. }) => {
            let (v, av) = project_out_pair(&xb, &wb)?;
            let (v, av) = independent_basis(&v, &av);
            wb = Basis { v, av };
            if wb.v.ncols() == 0 {
                return Ok(pass_through(input));
            }
            local_pencil(&xb, &[&wb], q)?
        }
        Err(e) => return Err(e),
    };
    Ok(assemble(&xb, &[&wb], sol, UpdateKind::SteepestDescent))
}
