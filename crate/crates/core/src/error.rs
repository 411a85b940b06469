use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("quadrature did not converge: last estimate {last}, previous {previous}")]
    NonConvergence { last: f64, previous: f64 },

    #[error("point {re} + {im}i is not inside the open unit disc")]
    OutsideDisc { re: f64, im: f64 },

    #[error("boundary evaluation rejected at angle {angle}")]
    BoundaryEvaluation { angle: f64 },

    #[error("evaluation failed at {re} + {im}i: {reason}")]
    Evaluation { re: f64, im: f64, reason: String },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("sampling resolution insufficient: {0}")]
    Resolution(String),

    #[error("tail diverges: {0}")]
    Divergent(String),

    #[error("insufficient samples: {absorbed} absorbed walks (need at least {required})")]
    InsufficientSamples { absorbed: u64, required: u64 },

    #[error("radius search failed: {0}")]
    SearchFailed(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
