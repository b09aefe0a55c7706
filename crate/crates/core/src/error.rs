use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates its documented invariant.
    #[error("invalid configuration: {key}: {reason}")]
    Config { key: String, reason: String },

    /// An input lies outside the domain of a model function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The data cannot identify the requested parameters.
    #[error("rank-deficient data: {0}")]
    RankDeficient(String),

    /// The planner was asked to plan with nothing left to localize.
    #[error("no unlocalized targets remain")]
    NothingToPlan,

    #[error("unknown sweep parameter `{0}` (expected alpha, n_actions, n_targets or policy-horizon)")]
    UnknownSweepParameter(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// An error traced back to a line of the configuration document.
    #[error("line {line}: {inner}")]
    Located { line: usize, inner: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
