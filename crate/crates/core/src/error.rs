use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polynomial is identically zero")]
    IdenticallyZero,

    #[error("root isolation failed: {0}")]
    RootFailure(String),

    #[error("polynomial is not convex on [{lo}, {hi}]: p'(lo) = {d_lo} > p'(hi) = {d_hi}")]
    NotConvexOnInterval { lo: f64, hi: f64, d_lo: f64, d_hi: f64 },

    #[error("bitangent bracket [{lo}, {hi}] for intervals {left} and {right} is invalid: {reason}")]
    BracketFailure {
        left: usize,
        right: usize,
        lo: f64,
        hi: f64,
        reason: String,
    },

    #[error("point {x} lies outside the domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("link is not monotone on [{lo}, {hi}]: derivative changes sign near {at}")]
    NotMonotone { lo: f64, hi: f64, at: f64 },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
