use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),

    #[error("{what} of {got} exceeds the supported limit {limit}")]
    SizeLimit {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    /// The flow needed for an r-factor completion could not be routed.
    #[error("r-factor completion infeasible: flow {achieved} < required {required}")]
    Infeasible { achieved: u64, required: u64 },

    #[error("setup failure: {0}")]
    SetupFailure(String),

    #[error("{} arcs left uncovered", uncovered.len())]
    CoverageFailure { uncovered: Vec<(usize, usize)> },

    /// Parameter policy declined to run a pipeline at this density.
    #[error("refused: {0}")]
    Refused(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
