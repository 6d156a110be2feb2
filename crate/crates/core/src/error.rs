use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("stack index {index} out of range for h = {h}")]
    IndexOutOfRange { h: u32, index: usize },

    #[error("strategies have different heights ({0} and {1})")]
    HeightMismatch(u32, u32),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("probability {0} is outside (0, 1)")]
    ProbabilityOutOfRange(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no sign change found: {0}")]
    NoSignChange(String),

    #[error("could not parse rational {0:?}")]
    ParseRational(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
