use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("layout is not on the integer grid (position {position} is not a whole multiple of d0)")]
    NonIntegerGrid { position: f64 },

    #[error("unsupported element count {count}: supported range is {min}..={max}")]
    UnsupportedCount { count: usize, min: usize, max: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("requested {requested} sources but only {available} can be resolved")]
    TooManySources { requested: usize, available: usize },

    #[error("estimation failed: {0}")]
    EstimationFailure(String),

    #[error("rank-deficient matrix: {0}")]
    RankDeficient(&'static str),

    #[error("spatial smoothing requires a uniformly spaced layout")]
    NonUniformLayout,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
