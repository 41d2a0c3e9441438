use std::ops::Range;

use crate::block::BlockVectors;
use crate::field::Field;
use crate::rayleigh_ritz::{detect_converged, RitzResult};

use super::partition::split_blocks;

/// Iterate of the PPCG loop. Locked columns are the leading ones of the
/// combined block `[X_lock, X]`.
#[derive(Clone, Debug)]
pub struct SolverState<T: Field> {
    pub x: BlockVectors<T>,
    pub ax: BlockVectors<T>,
    /// Residual block on entry to an iteration, preconditioned and projected
    /// search directions inside it.
    pub w: BlockVectors<T>,
    pub p: Option<(BlockVectors<T>, BlockVectors<T>)>,
    pub x_lock: BlockVectors<T>,
    pub ax_lock: BlockVectors<T>,
    pub iter: usize,
    pub partition: Vec<Range<usize>>,
    pub sbsize: usize,
}

impl<T: Field> SolverState<T> {
    pub fn new(x: BlockVectors<T>, ax: BlockVectors<T>, w: BlockVectors<T>, sbsize: usize) -> Self {
        let n = x.nrows();
        let partition = split_blocks(x.ncols(), sbsize);
        Self {
            x,
            ax,
            w,
            p: None,
            x_lock: BlockVectors::zeros(n, 0),
            ax_lock: BlockVectors::zeros(n, 0),
            iter: 0,
            partition,
            sbsize,
        }
    }

    pub fn k_act(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_locked(&self) -> usize {
        self.x_lock.ncols()
    }

    pub fn width(&self) -> usize {
        self.k_act() + self.n_locked()
    }

    /// Column indices (in the combined block) of locked and active columns.
    pub fn j_lock(&self) -> Range<usize> {
        0..self.n_locked()
    }

    pub fn j_act(&self) -> Range<usize> {
        self.n_locked()..self.width()
    }

    /// The first `k` columns of `[X_lock, X]` and their products.
    pub fn leading(&self, k: usize) -> (BlockVectors<T>, BlockVectors<T>) {
        let k = k.min(self.width());
        let nl = self.n_locked();
        if k <= nl {
            return (self.x_lock.columns(0..k), self.ax_lock.columns(0..k));
        }
        let x = BlockVectors::hstack(&[&self.x_lock, &self.x.columns(0..k - nl)]).expect("row dimensions agree");
        let ax = BlockVectors::hstack(&[&self.ax_lock, &self.ax.columns(0..k - nl)]).expect("row dimensions agree");
        (x, ax)
    }
}

/// Installs the Ritz pairs of a Rayleigh-Ritz step over the whole block and
/// moves the converged leading pairs into the locked set.
///
/// The locked set is recomputed from scratch on every call. Active columns
/// keep the conjugate directions they had before the call where one exists;
/// columns that were locked before and are active now start with a zero
/// direction.
pub fn lock_and_compact<T: Field>(state: SolverState<T>, ritz: &RitzResult<T>, tol: f64) -> SolverState<T> {
    let width = ritz.values.len();
    let n = ritz.vectors.nrows();
    let old_locked = state.n_locked();
    let n_lock = detect_converged(ritz, tol).len();
    let residuals = ritz.residuals();

    let p = state.p.map(|(p, ap)| {
        let mut new_p = BlockVectors::zeros(n, width - n_lock);
        let mut new_ap = BlockVectors::zeros(n, width - n_lock);
        for (slot, combined) in (n_lock..width).enumerate() {
            if combined >= old_locked && combined - old_locked < p.ncols() {
                let src = combined - old_locked;
                new_p.set_columns(slot, &p.column(src));
                new_ap.set_columns(slot, &ap.column(src));
            }
        }
        (new_p, new_ap)
    });

    SolverState {
        x: ritz.vectors.columns(n_lock..width),
        ax: ritz.products.columns(n_lock..width),
        w: residuals.columns(n_lock..width),
        p,
        x_lock: ritz.vectors.columns(0..n_lock),
        ax_lock: ritz.products.columns(0..n_lock),
        iter: state.iter,
        partition: split_blocks(width - n_lock, state.sbsize),
        sbsize: state.sbsize,
    }
}
