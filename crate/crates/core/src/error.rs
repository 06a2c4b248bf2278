use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("need at least {min} observations, got {got}")]
    TooFewObservations { got: usize, min: usize },

    #[error("data matrix has no columns")]
    NoColumns,

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("column {col} has zero variance")]
    ZeroVariance { col: usize },

    #[error("observation rows {first} and {second} are identical")]
    DuplicateRows { first: usize, second: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigensolver did not converge for eigenvalue {index} after {iterations} QL sweeps")]
    EigenNoConvergence { index: usize, iterations: usize },

    #[error("Stieltjes derivative diverges: x = {x} equals eigenvalue {index}")]
    Divergent { x: f64, index: usize },

    #[error("alpha = {alpha} is not to the right of the bulk (largest atom at {bulk_max})")]
    InsideBulk { alpha: f64, bulk_max: f64 },

    #[error("fixed-point iteration stopped after {iterations} iterations, residual {residual:e}")]
    FixedPointNoConvergence { iterations: usize, residual: f64 },

    #[error("matrix is singular")]
    Singular,

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),
}

impl Error {
    /// True for failures of a numerical routine rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenNoConvergence { .. }
                | Error::Divergent { .. }
                | Error::FixedPointNoConvergence { .. }
                | Error::Singular
                | Error::DegenerateSpectrum(_)
        )
    }
}
