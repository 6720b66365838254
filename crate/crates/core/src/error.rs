use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("interpolation points {first} and {second} coincide (distance {distance:e})")]
    DuplicatePoints {
        first: usize,
        second: usize,
        distance: f64,
    },

    #[error("interpolation set is not poised: {0}")]
    NotPoised(String),

    #[error("interpolation data is inconsistent on the quadratic space (relative residual {residual:e})")]
    Inconsistent { residual: f64 },

    #[error("no replacement keeps the interpolation system nonsingular")]
    GeometryFailure,

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("unknown solver `{0}`")]
    UnknownSolver(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
