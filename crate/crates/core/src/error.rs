//! Crate-wide error type.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("expected {expected} channels, got {got}")]
    ChannelMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("data length {got} does not match {width}x{height}x{channels}")]
    DataLength {
        width: usize,
        height: usize,
        channels: usize,
        got: usize,
    },

    #[error("kernel dimensions must be odd, got {0}x{1}")]
    EvenKernel(usize, usize),

    #[error("sigma must be > 0, got {0}")]
    InvalidSigma(f64),

    #[error("thresholds must satisfy 0 <= low < high <= 1, got low={0} high={1}")]
    InvalidThresholds(f64, f64),

    #[error("image {0}x{1} is smaller than the {2}x{2} window")]
    ImageTooSmall(usize, usize, usize),

    #[error("transform matrix is near-singular (|det| = {0:.3e})")]
    SingularTransform(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no decodable images found in {0}")]
    EmptySource(PathBuf),

    #[error("no image pairs found")]
    EmptyPairSet,

    #[error("dataset has no training pairs")]
    EmptyDataset,

    #[error("loss became non-finite at epoch {epoch}, step {step}: {detail}")]
    NanLoss {
        epoch: usize,
        step: usize,
        detail: String,
    },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("unsupported model file version {0} (newest supported: {1})")]
    UnsupportedVersion(u16, u16),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn image(path: impl Into<PathBuf>, source: image::ImageError) -> Self {
        Error::Image {
            path: path.into(),
            source,
        }
    }
}
