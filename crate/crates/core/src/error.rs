use thiserror::Error;

/// Library-wide error type.
///
/// Numeric routines return `NoConvergence` with the best iterate found so the
/// caller can decide whether a partial answer is usable; everything else is a
/// contract violation at the call site.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input: {what}")]
    NonFinite { what: &'static str },

    #[error("domain error: {what}")]
    Domain { what: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("arm norm {norm} exceeds the unit ball")]
    ArmNorm { norm: f64 },

    #[error("arm set is empty")]
    EmptyArmSet,

    #[error("direction argmax undefined for theta = 0 on a ball/sphere arm set")]
    DegenerateDirection,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("solver stopped after {iterations} iterations (grad norm {grad_norm:.3e})")]
    NoConvergence {
        iterations: u32,
        grad_norm: f64,
        /// Best iterate seen, exposed so diagnostics can inspect near-misses.
        best: Vec<f64>,
    },

    #[error("planner error: {what}")]
    Planner { what: String },

    #[error("unsupported operation: {what}")]
    Unsupported { what: String },

    #[error("mismatched inputs: {what}")]
    Mismatch { what: String },

    #[error("config key `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
