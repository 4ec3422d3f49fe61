use thiserror::Error;

/// Errors raised by the crossbar models.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("row index {index} out of range for a {n_rows}-row channel")]
    RowOutOfRange { index: usize, n_rows: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dense oracle is limited to {max} rows, got {n_rows}")]
    OracleTooLarge { n_rows: usize, max: usize },

    #[error("singular nodal system")]
    Singular,

    #[error("infeasible design target: {0}")]
    Infeasible(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("unknown parameter path `{0}`")]
    UnknownParameter(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
