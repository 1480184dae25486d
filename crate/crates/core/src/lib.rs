//! Image-based wilting phenotyping: segmentation, shape metrics, group
//! statistics and a random-forest wilting classifier.

pub mod error;
pub mod forest;
pub mod geometry;
pub mod metrics;
pub mod pipeline;
pub mod raster;
pub mod segmentation;
pub mod stats;
pub mod synth;

pub use error::{Result, WiltError};
