use thiserror::Error;

use crate::reporting::Unit;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("report of {z} {unit}(s) lies entirely beyond the two-year window")]
    OutOfWindow { z: u32, unit: Unit },

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("degenerate distribution: probability at day 0 is zero")]
    DegenerateDistribution,

    #[error("no usable records")]
    EmptyData,

    #[error("sampler failure: {0}")]
    Sampler(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Dimension { .. } => "dimension",
            Error::OutOfWindow { .. } => "out_of_window",
            Error::InvalidRecord(_) => "invalid_record",
            Error::InvalidDistribution(_) => "invalid_distribution",
            Error::DegenerateDistribution => "degenerate_distribution",
            Error::EmptyData => "empty_data",
            Error::Sampler(_) => "sampler",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}
