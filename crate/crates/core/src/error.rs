//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid design vector: {0}")]
    InvalidBits(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("geometry is not canonically encodable: {0}")]
    NotEncodable(String),

    #[error("empty cell set")]
    EmptyCells,

    #[error("nets overlap at {0} cell(s)")]
    OverlappingNets(usize),

    #[error("degenerate two-port network (S21 denominator is zero)")]
    DegenerateNetwork,

    #[error("empty observation set")]
    NoData,

    #[error("posterior factorization failed")]
    Factorization,

    #[error("coefficient vector has length {got}, expected {expected}")]
    CoefficientLength { got: usize, expected: usize },

    #[error("exhaustive search limited to {max} variables, instance has {n}")]
    TooManyVariables { n: usize, max: usize },

    #[error("empty sample set")]
    EmptySampleSet,

    #[error("remote sampler unreachable after {attempts} attempt(s): {message}")]
    Connection { attempts: u32, message: String },

    #[error("malformed sampler response: {0}")]
    MalformedResponse(String),

    #[error("sampler energy mismatch for {bits}: reported {reported}, recomputed {local}")]
    EnergyMismatch {
        bits: String,
        reported: f64,
        local: f64,
    },

    #[error("checkpoint log does not match this run: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether retrying the same request may succeed.
    pub fn is_retryable(&self) -> bool {
        matches!(self, Error::Connection { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
