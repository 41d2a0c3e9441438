use crate::error::{EigenError, Result};

/// When the active block is re-orthonormalized on iterations without a
/// Rayleigh-Ritz step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OrthPolicy {
    EveryIteration,
    /// Only on iterations whose (1-based) number is a multiple of `t`.
    EveryT(usize),
    /// Skip while `|X* X - I|_F` stays below the threshold.
    Adaptive(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OrthScheme {
    CholeskyQr,
    /// Truncated polar series with this many correction terms; falls back
    /// to Cholesky QR when the block is too far from orthonormal.
    TaylorPolar(usize),
}

/// Which of the two projections against the current block are applied to
/// the search directions. Both are on by default; switching one off is only
/// useful for experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Projection {
    pub w: bool,
    pub p: bool,
}

impl Default for Projection {
    fn default() -> Self {
        Self { w: true, p: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Number of wanted eigenpairs.
    pub k: usize,
    /// Extra columns carried along but excluded from the stopping test.
    pub nbuf: usize,
    /// Column width of the independent subblock updates.
    pub sbsize: usize,
    /// Iterations between Rayleigh-Ritz steps; `None` disables them.
    pub rr_period: Option<usize>,
    /// Tolerance on the relative subspace residual of the `k` leading columns.
    pub tol: f64,
    /// Optional tolerance on the relative trace change, OR-ed with `tol`.
    pub trace_tol: Option<f64>,
    pub max_iter: usize,
    pub orth_policy: OrthPolicy,
    pub orth_scheme: OrthScheme,
    pub projection: Projection,
    /// Seed for the random part of the initial guess.
    pub seed: u64,
}

pub const DEFAULT_SBSIZE: usize = 5;
pub const DEFAULT_RR_PERIOD: usize = 5;
pub const DEFAULT_TAYLOR_TERMS: usize = 4;

/// `ceil(0.02 k)` buffer columns.
pub fn default_nbuf(k: usize) -> usize {
    (2 * k).div_ceil(100)
}

impl SolverOptions {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            nbuf: default_nbuf(k),
            sbsize: DEFAULT_SBSIZE,
            rr_period: Some(DEFAULT_RR_PERIOD),
            tol: 1e-6,
            trace_tol: None,
            max_iter: 1000,
            orth_policy: OrthPolicy::EveryIteration,
            orth_scheme: OrthScheme::CholeskyQr,
            projection: Projection::default(),
            seed: 0,
        }
    }

    /// Block width including buffer columns.
    pub fn width(&self) -> usize {
        self.k + self.nbuf
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(EigenError::InvalidOptions(msg.to_string()));
        if self.k == 0 {
            return fail("k must be at least 1");
        }
        if self.sbsize == 0 {
            return fail("sbsize must be at least 1");
        }
        if self.rr_period == Some(0) {
            return fail("rr_period must be at least 1");
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return fail("tol must be positive and finite");
        }
        if let Some(t) = self.trace_tol {
            if !(t > 0.0) {
                return fail("trace_tol must be positive");
            }
        }
        match self.orth_policy {
            OrthPolicy::EveryT(0) => return fail("orthonormalization period must be at least 1"),
            OrthPolicy::Adaptive(t) if !(t > 0.0) => return fail("adaptive threshold must be positive"),
            _ => {}
        }
        if self.orth_scheme == OrthScheme::TaylorPolar(0) {
            return fail("taylor polar scheme needs at least one term");
        }
        Ok(())
    }
}
