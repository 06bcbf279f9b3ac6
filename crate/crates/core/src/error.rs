use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("invalid hyperparameters: {0}")]
    InvalidHyperParams(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite risk at step {step}")]
    NonFiniteRisk { step: usize },

    #[error("indicator hypothesis violated: {0}")]
    Hypothesis(#[from] crate::approx::HypothesisViolation),

    #[error("unknown target kind `{0}`")]
    UnknownKind(String),

    #[error("target fails its Hölder spot check: {violations} violating pairs (worst ratio {worst_ratio})")]
    HolderViolation { violations: usize, worst_ratio: f64 },

    #[error("{count} interaction groups exceed the configured limit of {limit}")]
    TooManyGroups { count: usize, limit: usize },

    #[error("run n = {n}, replication = {replication}: {source}")]
    Cell { n: usize, replication: usize, source: Box<Error> },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("weight file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
