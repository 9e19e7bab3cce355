use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty sample: at least one draw is required")]
    EmptySample,

    /// The estimator carries no information on this sample (e.g. the
    /// harmonic-mean estimator with no draw inside the event).
    #[error("no information: {0}")]
    NoInformation(String),

    #[error("insufficient data: need at least {needed} draws in the event, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("invalid event: {0}")]
    InvalidEvent(String),

    #[error("outcome {outcome} appears with inconsistent probability annotations")]
    InconsistentAnnotation { outcome: u64 },

    #[error("missing observable value for outcome {0}")]
    MissingValue(u64),

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    #[error("infinite variance: {0}")]
    InfiniteVariance(String),

    #[error("enumeration needs {required} items but the budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("invalid encoding: {0}")]
    InvalidEncoding(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
