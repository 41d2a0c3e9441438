//! Problem sources: sparse Hermitian matrices, Matrix Market files, model
//! Hamiltonians and diagonal preconditioners.

mod mm;
mod models;
mod precond;
mod sparse;

pub use mm::{parse_matrix_market, read_matrix_market, write_matrix_market, write_matrix_market_to, MatrixMarket};
pub use models::{
    laplacian_1d, laplacian_1d_eigenvalues, laplacian_3d, laplacian_plus_potential, random_hermitian, two_well_potential,
};
pub use precond::{jacobi_preconditioner, DiagonalPreconditioner, JACOBI_FLOOR};
pub use sparse::SparseHermitian;
