use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input is missing a required column.
    #[error("schema error: missing column `{0}`")]
    Schema(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("vehicle {vehicle_id}: track has {len} samples, smoothing needs at least {needed}")]
    TooShort {
        vehicle_id: i64,
        len: usize,
        needed: usize,
    },

    #[error("vehicle {vehicle_id}: smoothed {axis} acceleration {value:.3} m/s^2 exceeds the sanity bound")]
    SanityBound {
        vehicle_id: i64,
        axis: &'static str,
        value: f64,
    },

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    /// Model and buffer were produced under different normalization constants.
    #[error("version mismatch: {0}")]
    Version(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
