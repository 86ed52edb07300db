use thiserror::Error;

use crate::optim::OptimError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the uncertainty-quantification library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input is empty")]
    EmptyInput,
    #[error("a probability vector needs at least 2 classes, got {0}")]
    TooFewClasses(usize),
    #[error("probability entry {value} at index {index} is negative")]
    NegativeEntry { index: usize, value: f64 },
    #[error("probability entry at index {index} is not finite")]
    NonFiniteEntry { index: usize },
    #[error("probabilities sum to {sum}, expected 1")]
    SumNotOne { sum: f64 },
    #[error("log-likelihood at index {index} is not finite ({value})")]
    NonFiniteLikelihood { index: usize, value: f64 },
    #[error("{what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("delta must be a finite number >= 1, got {0}")]
    InvalidDelta(f64),
    #[error("subset {subset:#b} is not a subset of {classes} classes")]
    InvalidSubset { subset: u64, classes: usize },
    #[error("{0} classes exceed the supported maximum of 16")]
    TooManyClasses(usize),
    #[error("capacity is invalid: {0}")]
    InvalidCapacity(String),
    #[error("Möbius masses sum to {sum}, expected 1")]
    NormalizationFailure { sum: f64 },
    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("feature vector has length {found}, model expects {expected}")]
    FeatureDimensionMismatch { expected: usize, found: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("model text, line {line}: {message}")]
    ModelFormat { line: usize, message: String },
    #[error("no records to evaluate")]
    EmptyRecords,
    #[error("rejection curves do not share grid, method and measure")]
    GridMismatch,
}
