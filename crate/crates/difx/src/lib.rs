//! Differential-imaging toolkit.
//!
//! The crate renders a controlled indoor scene twice — once with a reflective
//! "jacket" standing behind the camera and once without — and estimates the
//! jacket's width, height, surface bumpiness, and chromaticity from the
//! difference of the two photographs. A sweep harness reproduces the full
//! experiment grid (four single-parameter sweeps across seven SNR levels) and
//! emits CSV tables and SVG plots.
//!
//! Pipeline overview:
//!
//! 1. [`scene`] — scene parameterization, defaults, validation, sweep points.
//! 2. [`render`] — deterministic direct lighting plus photon-mapped indirect
//!    light scattered by the bump-mapped jacket.
//! 3. [`noise`] — SNR-calibrated Gaussian sensor noise.
//! 4. [`differential`] — difference image, grayscale, thresholded mask.
//! 5. [`estimate`] — RMS size, ROI, bumpiness, and chromaticity estimators.
//! 6. [`harness`] — sweep execution, render cache, CSV/SVG output.
//! 7. [`raster`] — float image buffers and bit-exact file formats.

pub mod differential;
pub mod estimate;
pub mod harness;
pub mod noise;
pub mod raster;
pub mod render;
pub mod scene;

mod util;

pub use util::mix64;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum DifxError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// Malformed or unsupported file content (bad magic, truncated payload, ...).
    #[error("format error: {0}")]
    Format(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// The difference carries no usable signal (threshold found nothing,
    /// or a ROI statistic degenerated).
    #[error("no signal: {0}")]
    NoSignal(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, DifxError>;
