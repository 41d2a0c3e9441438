//! Reference solvers: block Davidson-Liu with thick restart, and LOBPCG.

mod davidson;
mod lobpcg;

pub use davidson::davidson_solve;
pub use lobpcg::lobpcg_solve;

use crate::error::{EigenError, Result};
use crate::ppcg::default_nbuf;

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineOptions {
    pub k: usize,
    pub nbuf: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Davidson restarts once the search space would exceed this multiple
    /// of `k + nbuf` columns. Ignored by LOBPCG.
    pub restart_dim_multiple: usize,
}

pub const DEFAULT_RESTART_DIM_MULTIPLE: usize = 2;

impl BaselineOptions {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            nbuf: default_nbuf(k),
            tol: 1e-6,
            max_iter: 1000,
            seed: 0,
            restart_dim_multiple: DEFAULT_RESTART_DIM_MULTIPLE,
        }
    }

    pub fn width(&self) -> usize {
        self.k + self.nbuf
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(EigenError::InvalidOptions(msg.to_string()));
        if self.k == 0 {
            return fail("k must be at least 1");
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return fail("tol must be positive and finite");
        }
        if self.restart_dim_multiple < 2 {
            return fail("restart_dim_multiple must be at least 2");
        }
        Ok(())
    }
}
