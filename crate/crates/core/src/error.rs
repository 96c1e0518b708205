use thiserror::Error;

/// Everything that can go wrong in this crate.
///
/// The variants fall into two families: malformed or hypothesis-violating
/// input (`InvalidPointSet`, `Parse`, `InvalidCurve`, `Precondition`, ...)
/// and failed internal checks (`MonotonicityViolation`, `Assertion`). The CLI
/// maps the first family to exit code 3 and the second to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid point set: {0}")]
    InvalidPointSet(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid rational literal `{0}`")]
    BadRational(String),

    #[error("y = {y} lies outside [-{delta}, {delta}]")]
    Domain { y: f64, delta: f64 },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(
        "sampler exhausted after {rejections} consecutive rejections \
         ({placed} of {requested} points placed)"
    )]
    SamplerExhausted {
        rejections: u64,
        placed: usize,
        requested: usize,
    },

    #[error("monotonicity violation at delta^2 = {delta_sq}, list {list} ({tag}), index {index}: {detail}")]
    MonotonicityViolation {
        delta_sq: String,
        list: usize,
        tag: String,
        index: usize,
        detail: String,
    },

    #[error("assertion failed: {0}")]
    Assertion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by a failed check rather than by bad input.
    pub fn is_assertion(&self) -> bool {
        matches!(
            self,
            Error::MonotonicityViolation { .. } | Error::Assertion(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
