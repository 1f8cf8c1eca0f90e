//! The difference pipeline: D, its grayscale, and the thresholded mask.
//!
//! D is a signed float image — never clamped, because the downstream
//! estimators are ratios and thresholds that clamping would bias.

use crate::raster::{BinaryMask, GrayImageF, ImageF};
use crate::{DifxError, Result};

/// Threshold parameters for the mask step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdParams {
    /// Mask cutoff as a fraction of the grayscale maximum.
    pub tau: f64,
    /// Below this maximum the difference is considered pure numerical noise
    /// (one 16-bit quantization step is ≈ 1.5e-5).
    pub epsilon_floor: f64,
}

impl Default for ThresholdParams {
    fn default() -> Self {
        Self {
            tau: 1.0 / 20.0,
            epsilon_floor: 1e-6,
        }
    }
}

/// Pixelwise difference `p1 - p2`, signed and unclamped.
pub fn diff(p1: &ImageF, p2: &ImageF) -> Result<ImageF> {
    if !p1.same_dims(p2) {
        return Err(DifxError::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            p1.width(),
            p1.height(),
            p2.width(),
            p2.height()
        )));
    }
    let pixels = p1
        .pixels()
        .iter()
        .zip(p2.pixels())
        .map(|(a, b)| [a[0] - b[0], a[1] - b[1], a[2] - b[2]])
        .collect();
    Ok(ImageF::from_pixels(p1.width(), p1.height(), pixels))
}

/// Per-pixel channel mean, ((R + G + B) / 3).
pub fn grayscale(d: &ImageF) -> GrayImageF {
    let pixels = d
        .pixels()
        .iter()
        .map(|p| (p[0] + p[1] + p[2]) / 3.0)
        .collect();
    GrayImageF::from_pixels(d.width(), d.height(), pixels)
}

/// Mask of pixels at or above `tau` times the grayscale maximum. The cutoff
/// is relative, so positive rescaling of the input leaves the mask unchanged.
/// Fails with no-signal when the maximum sits at or below the epsilon floor.
pub fn threshold(dg: &GrayImageF, params: &ThresholdParams) -> Result<BinaryMask> {
    let max = dg.pixels().iter().copied().fold(f32::NEG_INFINITY, f32::max);
    if max.is_nan() || (max as f64) <= params.epsilon_floor {
        return Err(DifxError::NoSignal(format!(
            "grayscale difference maximum {max} is at or below the floor {}",
            params.epsilon_floor
        )));
    }
    let cutoff = (params.tau * max as f64) as f32;
    let bits = dg.pixels().iter().map(|&v| v >= cutoff).collect();
    Ok(BinaryMask::from_bits(dg.width(), dg.height(), bits))
}
