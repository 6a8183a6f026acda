use thiserror::Error;

/// Errors raised anywhere in the reservoir simulation stack.
#[derive(Debug, Error)]
pub enum QrcError {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("integration failed at t = {time_reached}: {reason}")]
    Integration { time_reached: f64, reason: String },
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("ingestion error at line {line}: {reason}")]
    Ingestion { line: usize, reason: String },
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),
    #[error("undefined target: {0}")]
    UndefinedTarget(String),
    #[error("truncated range: {0}")]
    TruncatedRange(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QrcError>;
