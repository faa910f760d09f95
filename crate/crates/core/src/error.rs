use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("sample label `{0}` is not in the support")]
    UnknownOutcome(String),
    #[error("conditional distribution undefined at x = `{0}` (zero marginal mass)")]
    UndefinedConditional(String),
    #[error("support mismatch: {0}")]
    SupportMismatch(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("invalid loss: {0}")]
    InvalidLoss(String),
    #[error("input exceeds desk-scale limit: {0}")]
    TooLarge(String),
    #[error("numeric non-convergence: {0}")]
    NonConvergence(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("empty input")]
    Empty,
    #[error("serialization: {0}")]
    Serde(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
