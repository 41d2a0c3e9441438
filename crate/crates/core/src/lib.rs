//! Block eigensolvers for the smallest eigenpairs of large Hermitian
//! operators.
//!
//! The main entry point is [`ppcg_solve`]. [`davidson_solve`] and
//! [`lobpcg_solve`] are provided as baselines and share the same report
//! format. Model problems, a Matrix Market reader and a Jacobi
//! preconditioner live in [`problems`].

pub mod baselines;
pub mod block;
mod common;
pub mod error;
pub mod field;
pub mod operator;
pub mod pencil;
pub mod ppcg;
pub mod problems;
pub mod rayleigh_ritz;
pub mod report;

pub use baselines::{davidson_solve, lobpcg_solve, BaselineOptions};
pub use block::{BlockVectors, DenseMatrix};
pub use common::initial_block;
pub use error::{EigenError, Result};
pub use field::Field;
pub use operator::{DenseOperator, HermitianOperator, IdentityPreconditioner, Preconditioner};
pub use ppcg::{ppcg_solve, OrthPolicy, OrthScheme, Projection, SolverOptions};
pub use report::{ConvergenceTrace, SolveReport, SolveStatus, TraceRecord};
