//! Error type shared by all modules.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation (negative
    /// entry, NaN, nonpositive weight, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    /// A column of a system matrix sums (or square-sums) to zero.
    #[error("column {index} has zero weight; every column must touch the data")]
    ZeroColumn { index: usize },

    /// A ratio operator hit (Px)_i = 0 (or below the underflow guard).
    #[error("singular ratio at row {index}: (Px)_{index} vanished")]
    SingularRatio { index: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// An iteration step failed; carries the 1-based iteration index.
    #[error("step failed at iteration {iter}")]
    StepFailed {
        iter: usize,
        #[source]
        source: Box<Error>,
    },

    /// The objective rose along a descent iteration.
    #[error("descent violated at iteration {iter}: f went from {prev} to {next}")]
    DescentViolation { iter: usize, prev: f64, next: f64 },

    /// A requested independent minimizer cannot be computed for this
    /// instance (size or structure out of range for the oracle).
    #[error("oracle unavailable: {0}")]
    OracleUnavailable(String),

    /// A user-supplied callable produced an unusable value.
    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("unknown property: {0}")]
    UnknownProperty(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
