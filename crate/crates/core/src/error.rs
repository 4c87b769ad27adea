use std::io;

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("mode {mode} out of range for a tensor with {order} modes")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("index {index} out of range for extent {extent}")]
    IndexOutOfRange { index: usize, extent: usize },

    #[error("duplicate index {0} in index set")]
    DuplicateIndex(usize),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("degenerate distribution: all weights are zero")]
    DegenerateDistribution,

    #[error("cannot draw {requested} samples from a population of {available}")]
    SampleSizeTooLarge { requested: usize, available: usize },

    #[error("rank {rank} exceeds dimension {dim} in mode {mode}")]
    RankExceedsDimension { mode: usize, rank: usize, dim: usize },

    #[error("matrix is not orthonormal (residual {0:.3e})")]
    NotOrthonormal(f64),

    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),

    #[error("decomposition did not converge: {0}")]
    NoConvergence(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed tensor file: {0}")]
    MalformedFile(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
