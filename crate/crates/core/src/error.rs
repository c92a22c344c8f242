use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error(
        "{reps} Monte Carlo replicates cannot resolve alpha = {alpha:e}; at least {required} are needed"
    )]
    InsufficientReps {
        alpha: f64,
        reps: usize,
        required: usize,
    },

    #[error("no kernel mass at the ascent start{}", .index.map(|i| format!(" (point {i})")).unwrap_or_default())]
    NoMass { index: Option<usize> },

    #[error("invalid mixture: {0}")]
    Spec(String),

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("feature {feature}: {source}")]
    Feature {
        feature: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn for_feature(self, feature: usize) -> Self {
        Error::Feature {
            feature,
            source: Box::new(self),
        }
    }
}
