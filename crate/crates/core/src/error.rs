use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by code construction, detection and the simulation harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("code size n must be at least 1")]
    ZeroCodeSize,

    #[error("unknown code variant `{0}` (expected `ill` or `fdill`)")]
    UnknownVariant(String),

    #[error("dimension mismatch: {what}: expected {expected}, got {actual}")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("noise variance must be positive, got {0}")]
    NonPositiveNoise(f64),

    #[error("prior row {row} sums to {sum}, expected 1")]
    PriorNotNormalized { row: usize, sum: f64 },

    #[error("{detector} enumeration supports at most {limit} symbols, got {k}")]
    EnumerationGuard {
        detector: &'static str,
        limit: usize,
        k: usize,
    },

    #[error("regularized Gram matrix is not positive definite")]
    SingularSystem,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
