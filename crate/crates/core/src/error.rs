use thiserror::Error;

pub type Result<T> = std::result::Result<T, EigenError>;

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    /// Cholesky breakdown while orthonormalizing; `column` is the first
    /// column whose pivot was not positive.
    #[error("block is numerically rank deficient at column {column}")]
    RankDeficiency { column: usize },

    #[error("taylor polar orthonormalization not applicable: |X*X - I|_F = {deviation:.3e} exceeds {threshold}")]
    Applicability { deviation: f64, threshold: f64 },

    #[error("projected gram matrix is numerically singular (min eigenvalue {min_eigenvalue:.3e}, scale {scale:.3e})")]
    SingularGram { min_eigenvalue: f64, scale: f64 },

    #[error("dense eigensolver failed: {0}")]
    DenseSolver(String),

    #[error("operator application failed: {0}")]
    Operator(String),

    #[error("invalid options: {0}")]
    InvalidOptions(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported matrix market format: {0}")]
    UnsupportedFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(EigenError::Dimension {
            context,
            expected,
            found,
        })
    }
}
