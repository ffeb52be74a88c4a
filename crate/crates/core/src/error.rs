use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A link has zero rate, so the payload can never be delivered.
    #[error("infeasible link: rate is zero")]
    InfeasibleLink,

    #[error("bandwidth allocation requested for an empty selection")]
    EmptySelection,

    #[error("federated training needs at least one participant")]
    NoParticipants,

    #[error("R^2 is undefined when the truth is constant")]
    UndefinedMetric,

    #[error("enumeration oracle supports at most {cap} users, got {n}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("{path}: line {line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("config file: {0}")]
    ConfigFile(String),

    #[error("seed {seed}, mode {mode}: {source}")]
    Experiment {
        seed: u64,
        mode: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid_config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig { field, reason: reason.into() }
    }
}
