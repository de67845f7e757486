use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the dejittering library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("image dimensions must be positive, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },

    #[error("unsupported channel count {0}; expected 1 (grayscale) or 3 (RGB)")]
    UnsupportedChannels(usize),

    #[error("pixel buffer holds {actual} values, expected {expected}")]
    BufferLength { expected: usize, actual: usize },

    #[error("intensity {value} at index {index} lies outside [0, 1]")]
    IntensityOutOfRange { index: usize, value: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("displacement {value} at index {index} exceeds bound rho = {rho}")]
    BoundViolation { index: usize, value: i32, rho: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("chain problem must have at least one element and one label")]
    EmptyProblem,

    #[error("label {label} at position {position} is out of range for {labels} labels")]
    LabelOutOfRange {
        position: usize,
        label: usize,
        labels: usize,
    },

    #[error("labeling has {actual} entries, expected {expected}")]
    LabelingLength { expected: usize, actual: usize },

    #[error("cost function returned a non-finite value at element {0}")]
    NonFiniteCost(usize),

    #[error("problem has ternary terms; use solve_chain_ternary")]
    UnexpectedTernary,

    #[error("search space of {0} labelings is too large for exhaustive enumeration")]
    SearchSpaceTooLarge(f64),

    #[error("{path}: image has an alpha channel; only grayscale and RGB are supported")]
    AlphaChannel { path: PathBuf },

    #[error("{path}: unsupported pixel format {format}")]
    UnsupportedFormat { path: PathBuf, format: String },

    #[error("malformed displacement file, line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
