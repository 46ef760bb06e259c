use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not square ({nrows} x {ncols})")]
    NotSquare { nrows: usize, ncols: usize },

    #[error("invalid CSR structure: {0}")]
    InvalidStructure(String),

    #[error("row {row} has no stored diagonal entry")]
    MissingDiagonal { row: usize },

    #[error("row {row} has a zero or non-finite diagonal entry ({value})")]
    BadDiagonal { row: usize, value: f64 },

    #[error("entry {index} ({value:e}) overflows single precision")]
    CastOverflow { index: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("preconditioner `{0}` is not symmetric; CG requires a symmetric preconditioner")]
    NonSymmetricPreconditioner(String),

    #[error("non-positive curvature p'Ap = {curvature:e} at iteration {iteration}; matrix is not SPD")]
    NotPositiveDefinite { iteration: usize, curvature: f64 },

    #[error("iteration diverged at step {iteration} (relative residual {rel_res:e})")]
    Diverged { iteration: usize, rel_res: f64 },

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("dense eigensolver did not converge")]
    EigenNoConvergence,

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}
