//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by model construction, closed-form evaluation, the
/// simulator, and the trace pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("distribution parameterization yields a non-finite moment: {0}")]
    NonFiniteMoment(String),

    #[error("invalid distribution parameters: {0}")]
    InvalidDistribution(String),

    #[error("duplicate relay id `{0}`")]
    DuplicateId(String),

    #[error("relay `{id}` has a non-positive {which} rate ({value})")]
    NonPositiveRate {
        id: String,
        which: &'static str,
        value: f64,
    },

    #[error(
        "relay `{id}`: {which} rate {rate} is inconsistent with the \
         distribution mean {dist_mean} (expected rate = 1/mean)"
    )]
    InconsistentRate {
        id: String,
        which: &'static str,
        rate: f64,
        dist_mean: f64,
    },

    #[error("encounter order index {n} out of range (log holds {len} entries)")]
    IndexOutOfRange { n: usize, len: usize },

    #[error("unknown relay `{0}`")]
    UnknownRelay(String),

    #[error("invalid encounter log: {0}")]
    InvalidLog(String),

    #[error("meeting time must be positive when prior holders exist (s_n = {0})")]
    DegenerateTime(f64),

    #[error("{0} relays exceed the subset-enumeration cap of {1}; use the Monte Carlo oracle instead")]
    TooManyRelays(usize, usize),

    #[error("encounter log holds {got} entries but the relay set has {expected}")]
    IncompleteLog { got: usize, expected: usize },

    #[error("success probability is zero; the relay would decline any finite reward")]
    ZeroSuccessProbability,

    #[error("{0}")]
    DomainError(String),

    #[error("invalid experiment config: {0}")]
    ConfigError(String),

    #[error("empty position trace")]
    EmptyTrace,

    #[error("position records for node `{0}` are not sorted by time")]
    UnsortedInput(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
