use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("visibility {0} is outside the invertible range [0, 1]")]
    VisibilityDomain(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("negative joint probability {value:e} at outcome ({a}, {b})")]
    NegativeProbability { a: i8, b: i8, value: f64 },

    #[error("outcome grid sums to {0}, expected 1")]
    UnnormalizedGrid(f64),

    #[error("efficiency {0} is outside (0, 1]")]
    InvalidEfficiency(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error("count table: {0}")]
    Table(String),

    #[error("line {line}, field `{field}`: {message}")]
    Csv {
        line: u64,
        field: String,
        message: String,
    },

    #[error(transparent)]
    CsvIo(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
