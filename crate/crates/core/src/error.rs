use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Variants are grouped by the CLI into configuration errors (exit code 2)
/// and numerical errors (exit code 3); see [`Error::is_config`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} outside trace range [{first}, {last}]")]
    OutOfRange { index: i64, first: i64, last: i64 },

    #[error("trace too short: need {needed} samples, have {available}")]
    Length { needed: usize, available: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unsupported system structure: {0}")]
    UnsupportedStructure(String),

    #[error("least-squares problem is rank deficient (rank {rank} of {cols}) for poles {poles:?}")]
    Conditioning {
        rank: usize,
        cols: usize,
        poles: Vec<Complex64>,
    },

    #[error("eigenvalue solver did not converge on a {0}x{0} matrix")]
    EigenNonConvergence(usize),

    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unstable pole {omega}: |1 + omega| = {modulus} <= 1")]
    Instability { omega: Complex64, modulus: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("division by zero: {0}")]
    Division(String),

    #[error("singular implicit step at instant k = {k}")]
    StepSingularity { k: i64 },

    #[error("series diverges at s = {s}: |1 - s| = {modulus} >= radius {radius}")]
    Divergent { s: Complex64, modulus: f64, radius: f64 },

    #[error("numerical limit did not converge: {0}")]
    NumericalLimit(String),

    #[error("{0}")]
    Parse(String),

    #[error("{path}:{line}: {message}")]
    Config { path: String, line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// `true` for errors caused by bad user input rather than numerics.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Configuration(_)
            | Error::Parse(_)
            | Error::Config { .. }
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Dimension(_)
            | Error::UnsupportedStructure(_) => true,
            Error::Iteration { source, .. } => source.is_config(),
            _ => false,
        }
    }

    pub(crate) fn at_iteration(self, iteration: usize) -> Error {
        Error::Iteration {
            iteration,
            source: Box::new(self),
        }
    }
}
