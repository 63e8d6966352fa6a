use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A malformed record in an input file. `line` is 1-based.
    #[error("{path}: line {line}: {message}")]
    Record {
        path: String,
        line: usize,
        message: String,
    },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("corpus has {size} posts, at least {min} are needed for a holdout split")]
    CorpusTooSmall { size: usize, min: usize },

    #[error("duplicate post_id {0:?}")]
    DuplicatePostId(String),

    #[error("empty post_id")]
    EmptyPostId,

    #[error("post has no considered reactions (love + wow + sad + angry = 0)")]
    NoConsideredReactions,

    #[error("reaction count overflow")]
    CountOverflow,

    #[error("invalid split ratio {0}:{1}, weights must be positive")]
    InvalidRatio(u32, u32),

    #[error("invalid stopword on line {line}: {entry:?}")]
    InvalidStopword { line: usize, entry: String },

    #[error("embedding dimension mismatch on line {line}: expected {expected}, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("length mismatch: {predictions} predictions vs {gold} gold labels")]
    LengthMismatch { predictions: usize, gold: usize },

    #[error("nothing to evaluate")]
    EmptyEvaluation,

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("validation set is empty")]
    EmptyValidationSet,

    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    #[error("invalid training config: {0}")]
    InvalidConfig(String),

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    Diverged { epoch: usize, batch: usize },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn record(path: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Record {
            path: path.to_string(),
            line,
            message: message.into(),
        }
    }
}
