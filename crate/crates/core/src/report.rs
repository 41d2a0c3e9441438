//! Solver output: eigenpairs plus a per-iteration convergence trace.

use crate::block::BlockVectors;
use crate::field::Field;

/// One row of the convergence trace, recorded at each outer iteration's
/// convergence check.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub trace_value: f64,
    pub rel_resid: f64,
    pub rel_trace_change: f64,
    pub n_locked: usize,
    /// Cumulative operator applications, counted per column.
    pub n_matvec: usize,
    pub wall_ms: f64,
    /// `|X* X - I|_F` of the active block at this check. PPCG only.
    pub orth_loss: Option<f64>,
    /// Ritz values when the preceding step ended in a Rayleigh-Ritz solve.
    pub ritz_values: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceTrace {
    pub records: Vec<TraceRecord>,
}

impl ConvergenceTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIter,
    /// Converged after recovering from this many rank-deficient updates.
    BreakdownRecovered(usize),
}

impl SolveStatus {
    pub fn is_converged(self) -> bool {
        !matches!(self, SolveStatus::MaxIter)
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolveStatus::Converged => write!(f, "converged"),
            SolveStatus::MaxIter => write!(f, "max_iter"),
            SolveStatus::BreakdownRecovered(n) => write!(f, "breakdown-recovered({n})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport<T: Field> {
    /// The `k` wanted eigenvalue approximations, ascending.
    pub values: Vec<f64>,
    pub vectors: BlockVectors<T>,
    pub residual_norms: Vec<f64>,
    pub trace: ConvergenceTrace,
    pub status: SolveStatus,
    pub matvecs: usize,
    /// Number of dense Rayleigh-Ritz solves over the full block.
    pub rr_solves: usize,
    pub breakdowns: usize,
}

impl<T: Field> SolveReport<T> {
    /// Outer iterations, one per trace record.
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn final_residual(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.rel_resid)
    }
}
