use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the measurement chain.
#[derive(Debug, Error)]
pub enum WiltError {
    #[error("invalid raster: {0}")]
    InvalidRaster(String),

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("fiducial square {index}: sample window out of image bounds")]
    WindowOutOfBounds { index: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("degenerate stem: {0}")]
    DegenerateStem(String),

    /// Fewer than three non-collinear points. The hull collapses to a
    /// segment (or a point) whose doubled length is carried along.
    #[error("degenerate hull (perimeter {perimeter_px} px)")]
    DegenerateHull { perimeter_px: f64 },

    #[error("mask is empty")]
    EmptyMask,

    #[error("unknown metric `{name}`; valid names: {valid}")]
    UnknownMetric { name: String, valid: String },

    #[error("unknown group pair `{name}`; valid pairs: {valid}")]
    UnknownPair { name: String, valid: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl WiltError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        WiltError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, WiltError>;
