use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] ntc_core::Error),
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("invalid version set {input:?}: {msg}")]
    VersionSet { input: String, msg: String },
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
    #[error("cannot summarize an empty group")]
    EmptyGroup,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
