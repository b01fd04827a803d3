use thiserror::Error;

/// Errors raised by the credit-risk pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("CSV parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("column `{0}` has no observed values to fill from")]
    UnresolvableColumn(String),

    #[error("no feature columns remain")]
    NoFeatures,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("column mismatch: {0}")]
    ColumnMismatch(String),

    #[error("missing exposure column `{0}`")]
    MissingExposureColumn(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
