use thiserror::Error;

use crate::corpus::UnderspecLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain spec schema error: {0}")]
    Schema(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("unknown attribute category {0:?}")]
    UnknownCategory(String),

    #[error("domain mismatch: expected {expected}, found {found}")]
    DomainMismatch { expected: String, found: String },

    #[error("catalog is empty")]
    EmptyCatalog,

    #[error("policy emitted an invalid action: {0}")]
    InvalidAction(String),

    #[error("bucket {bucket} exhausted: requested {requested}, available {available}")]
    BucketExhausted {
        bucket: UnderspecLabel,
        requested: usize,
        available: usize,
    },

    #[error("meta-policy training set is empty")]
    EmptyTrainingSet,

    #[error("featurizer failed: {0}")]
    Featurizer(String),

    #[error("invalid prior: {0}")]
    Prior(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("artifact hash mismatch for {artifact}: expected {expected}, found {found}")]
    HashMismatch {
        artifact: String,
        expected: String,
        found: String,
    },

    #[error(transparent)]
    Bridge(#[from] crate::bridge::BridgeError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error stems from caller configuration rather than from the
    /// content of a data artifact.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Prior(_) | Error::OutOfRange(_))
    }
}
