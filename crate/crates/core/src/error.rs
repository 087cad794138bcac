use thiserror::Error;

/// Errors raised by the library. Membership and validation failures are
/// not errors; they are reported through return values.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("hull of an empty set of rectangles")]
    EmptyHull,

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("invalid delay {0}: delays must be finite and non-negative")]
    InvalidDelay(f64),

    #[error("zero delay cannot be solved for a rate")]
    ZeroDelay,

    #[error("unknown mode m{0}")]
    UnknownMode(usize),

    #[error("malformed automaton: {0}")]
    MalformedAutomaton(String),

    #[error("malformed trace {index}: {reason}")]
    MalformedTrace { index: usize, reason: String },

    #[error("line {line}, column {col}: {msg}")]
    Spec { line: usize, col: usize, msg: String },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("mode m{mode} has an unbounded flow in dimension {dim}; cannot sample")]
    UnboundedFlow { mode: usize, dim: usize },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
