use thiserror::Error;

/// Coarse failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numerical,
    Internal,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Usage => 2,
            ErrorClass::Data => 3,
            ErrorClass::Numerical => 4,
            ErrorClass::Internal => 5,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("series is empty")]
    EmptySeries,

    #[error("non-finite value {value} at position {index}")]
    NonFiniteInput { index: usize, value: f64 },

    #[error("order p={p} is too large for a series of length {n}")]
    OrderTooLarge { n: usize, p: usize },

    #[error("Markov order must be at least 1")]
    ZeroOrder,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("bandwidths must be positive and finite, got h={h}, h0={h0}")]
    InvalidBandwidth { h: f64, h0: f64 },

    #[error("kernel weights vanish at the query point")]
    DegenerateWeights,

    #[error("pair index {index} out of range for {len} pairs")]
    InvalidIndex { index: usize, len: usize },

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("no trial value accepted at alpha={alpha}")]
    EmptyAcceptedSet { alpha: f64 },

    #[error("warm-up length {warmup} is shorter than order {p}")]
    WarmupTooShort { warmup: usize, p: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "{failed} of {total} replications failed (first: replication {first_index}: {first_error})"
    )]
    TooManyFailures {
        failed: usize,
        total: usize,
        first_index: usize,
        first_error: String,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("input file is empty")]
    EmptyFile,

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidAlpha(_) | Error::InvalidConfig(_) | Error::InvalidGrid(_) => {
                ErrorClass::Usage
            }
            Error::DegenerateWeights | Error::EmptyAcceptedSet { .. } => ErrorClass::Numerical,
            Error::TooManyFailures { .. } => ErrorClass::Numerical,
            Error::Io(_) => ErrorClass::Internal,
            _ => ErrorClass::Data,
        }
    }

    /// Short machine-readable tag, printed by the CLI as `ERROR <code>: ...`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptySeries => "EmptySeries",
            Error::NonFiniteInput { .. } => "NonFiniteInput",
            Error::OrderTooLarge { .. } => "OrderTooLarge",
            Error::ZeroOrder => "ZeroOrder",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidAlpha(_) => "InvalidAlpha",
            Error::InvalidBandwidth { .. } => "InvalidBandwidth",
            Error::DegenerateWeights => "DegenerateWeights",
            Error::InvalidIndex { .. } => "InvalidIndex",
            Error::InvalidProbability(_) => "InvalidProbability",
            Error::DegenerateData(_) => "DegenerateData",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::EmptyAcceptedSet { .. } => "EmptyAcceptedSet",
            Error::WarmupTooShort { .. } => "WarmupTooShort",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::TooManyFailures { .. } => "TooManyFailures",
            Error::Parse { .. } => "ParseError",
            Error::EmptyFile => "EmptyFile",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
