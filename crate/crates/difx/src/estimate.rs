//! Jacket parameter estimators: RMS size, ROI, bumpiness, chromaticity.
//!
//! Pixel coordinates are pixel centers — x rightward, y downward, origin at
//! the top-left pixel. All statistics run in f64 regardless of the f32
//! sample storage.

use serde::{Deserialize, Serialize};

use crate::differential::{diff, grayscale, threshold, ThresholdParams};
use crate::raster::{BinaryMask, GrayImageF, ImageF};
use crate::{DifxError, Result};

/// Tunables of the estimation pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateParams {
    pub threshold: ThresholdParams,
    /// ROI half-extent multiplier on the RMS sizes.
    pub alpha: f64,
    /// Gaussian smoothing sigma (pixels) for the bumpiness estimator.
    pub sigma_px: f64,
}

impl Default for EstimateParams {
    fn default() -> Self {
        Self {
            threshold: ThresholdParams::default(),
            alpha: 2.0,
            sigma_px: 5.0,
        }
    }
}

/// Region of interest around the mask's gravity center. The integer rectangle
/// (inclusive bounds) covers the real-valued one, clipped to the image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Roi {
    pub center: (f64, f64),
    pub half_width_px: f64,
    pub half_height_px: f64,
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Roi {
    pub fn width(&self) -> usize {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0 + 1
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }
}

/// Everything the pipeline estimated for one image pair. `no_signal` set
/// means the thresholded difference carried nothing usable and the other
/// fields are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width_rms_px: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub height_rms_px: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gravity_center: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mask_area_px: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bumpiness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chromaticity: Option<[f64; 3]>,
    pub no_signal: bool,
}

impl EstimateReport {
    fn no_signal() -> Self {
        Self {
            width_rms_px: None,
            height_rms_px: None,
            gravity_center: None,
            mask_area_px: None,
            bumpiness: None,
            chromaticity: None,
            no_signal: true,
        }
    }
}

/// Mean coordinate of the set pixels.
pub fn gravity_center(mask: &BinaryMask) -> Result<(f64, f64)> {
    let mut sum_x = 0.0;
    let mut sum_y = 0.0;
    let mut count = 0usize;
    for (x, y) in mask.set_coords() {
        sum_x += x as f64;
        sum_y += y as f64;
        count += 1;
    }
    if count == 0 {
        return Err(DifxError::NoSignal("empty mask has no gravity center".into()));
    }
    Ok((sum_x / count as f64, sum_y / count as f64))
}

/// Root-mean-square horizontal and vertical distances of the set pixels from
/// `center`.
pub fn rms_extent(mask: &BinaryMask, center: (f64, f64)) -> Result<(f64, f64)> {
    let mut sum_dx2 = 0.0;
    let mut sum_dy2 = 0.0;
    let mut count = 0usize;
    for (x, y) in mask.set_coords() {
        sum_dx2 += (x as f64 - center.0).powi(2);
        sum_dy2 += (y as f64 - center.1).powi(2);
        count += 1;
    }
    if count == 0 {
        return Err(DifxError::NoSignal("empty mask has no extent".into()));
    }
    let s = count as f64;
    Ok(((sum_dx2 / s).sqrt(), (sum_dy2 / s).sqrt()))
}

/// Axis-aligned rectangle centered on the gravity center with half extents
/// `max(1, alpha·rms)`, clipped to the image.
pub fn make_roi(
    center: (f64, f64),
    w_rms: f64,
    h_rms: f64,
    alpha: f64,
    image_dims: (usize, usize),
) -> Roi {
    let half_w = (alpha * w_rms).max(1.0);
    let half_h = (alpha * h_rms).max(1.0);
    let (img_w, img_h) = image_dims;
    let clamp = |v: f64, hi: usize| (v.max(0.0) as usize).min(hi - 1);
    Roi {
        center,
        half_width_px: half_w,
        half_height_px: half_h,
        x0: clamp((center.0 - half_w).floor(), img_w),
        y0: clamp((center.1 - half_h).floor(), img_h),
        x1: clamp((center.0 + half_w).ceil(), img_w),
        y1: clamp((center.1 + half_h).ceil(), img_h),
    }
}

/// f64 working plane for the ROI crops.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Plane {
    pub w: usize,
    pub h: usize,
    pub v: Vec<f64>,
}

impl Plane {
    pub(crate) fn get(&self, x: usize, y: usize) -> f64 {
        self.v[y * self.w + x]
    }

    /// Replicate-edge sample.
    pub(crate) fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let cx = x.clamp(0, self.w as isize - 1) as usize;
        let cy = y.clamp(0, self.h as isize - 1) as usize;
        self.get(cx, cy)
    }

    pub(crate) fn mean(&self) -> f64 {
        self.v.iter().sum::<f64>() / self.v.len() as f64
    }
}

pub(crate) fn crop_gray(dg: &GrayImageF, roi: &Roi) -> Plane {
    let w = roi.width();
    let h = roi.height();
    let mut v = Vec::with_capacity(w * h);
    for y in roi.y0..=roi.y1 {
        for x in roi.x0..=roi.x1 {
            v.push(dg.get(x, y) as f64);
        }
    }
    Plane { w, h, v }
}

/// Normalized 1D Gaussian taps over radius ⌈3σ⌉.
fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as usize;
    let mut taps: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Separable Gaussian smoothing with replicate-edge padding.
pub(crate) fn gaussian_smooth(src: &Plane, sigma: f64) -> Plane {
    let taps = gaussian_kernel(sigma);
    let radius = taps.len() as isize / 2;
    let mut horizontal = Plane {
        w: src.w,
        h: src.h,
        v: vec![0.0; src.v.len()],
    };
    for y in 0..src.h as isize {
        for x in 0..src.w as isize {
            let mut acc = 0.0;
            for (i, &t) in taps.iter().enumerate() {
                acc += t * src.get_clamped(x + i as isize - radius, y);
            }
            horizontal.v[y as usize * src.w + x as usize] = acc;
        }
    }
    let mut out = Plane {
        w: src.w,
        h: src.h,
        v: vec![0.0; src.v.len()],
    };
    for y in 0..src.h as isize {
        for x in 0..src.w as isize {
            let mut acc = 0.0;
            for (i, &t) in taps.iter().enumerate() {
                acc += t * horizontal.get_clamped(x, y + i as isize - radius);
            }
            out.v[y as usize * src.w + x as usize] = acc;
        }
    }
    out
}

/// Per-pixel gradient magnitude from the [1, 0, -1] first-derivative stencil
/// applied horizontally and vertically, replicate-edge padded.
pub(crate) fn gradient_magnitude(src: &Plane) -> Plane {
    let mut out = Plane {
        w: src.w,
        h: src.h,
        v: vec![0.0; src.v.len()],
    };
    for y in 0..src.h as isize {
        for x in 0..src.w as isize {
            let gx = src.get_clamped(x - 1, y) - src.get_clamped(x + 1, y);
            let gy = src.get_clamped(x, y - 1) - src.get_clamped(x, y + 1);
            out.v[y as usize * src.w + x as usize] = (gx * gx + gy * gy).sqrt();
        }
    }
    out
}

/// Mean gradient magnitude of the Gaussian-smoothed ROI, normalized by the
/// mean of the raw ROI. Scale-invariant; zero for a constant region.
pub fn bumpiness(dg: &GrayImageF, roi: &Roi, sigma_px: f64) -> Result<f64> {
    let crop = crop_gray(dg, roi);
    let mean_raw = crop.mean();
    if mean_raw.is_nan() || mean_raw <= 0.0 {
        return Err(DifxError::NoSignal(format!(
            "ROI mean {mean_raw} is not positive"
        )));
    }
    let smoothed = gaussian_smooth(&crop, sigma_px);
    let rg = gradient_magnitude(&smoothed);
    Ok(rg.mean() / mean_raw)
}

/// Spatial channel means of the difference over the ROI, normalized to sum
/// to one.
pub fn chromaticity(d: &ImageF, roi: &Roi) -> Result<[f64; 3]> {
    let mut sums = [0.0f64; 3];
    for y in roi.y0..=roi.y1 {
        for x in roi.x0..=roi.x1 {
            let px = d.get(x, y);
            for c in 0..3 {
                sums[c] += px[c] as f64;
            }
        }
    }
    let total = sums[0] + sums[1] + sums[2];
    if total.is_nan() || total <= 0.0 {
        return Err(DifxError::NoSignal(format!(
            "ROI channel sum {total} is not positive"
        )));
    }
    Ok([sums[0] / total, sums[1] / total, sums[2] / total])
}

/// Runs the whole pipeline on an image pair:
/// diff → grayscale → threshold → gravity center → RMS extent → ROI →
/// bumpiness + chromaticity. A threshold (or degenerate-ROI) no-signal
/// outcome is reported, not raised; dimension mismatches are errors.
pub fn estimate_all(p1: &ImageF, p2: &ImageF, params: &EstimateParams) -> Result<EstimateReport> {
    let d = diff(p1, p2)?;
    let dg = grayscale(&d);
    let mask = match threshold(&dg, &params.threshold) {
        Ok(mask) => mask,
        Err(DifxError::NoSignal(_)) => return Ok(EstimateReport::no_signal()),
        Err(e) => return Err(e),
    };
    let center = gravity_center(&mask)?;
    let (w_rms, h_rms) = rms_extent(&mask, center)?;
    let roi = make_roi(center, w_rms, h_rms, params.alpha, (d.width(), d.height()));
    let bump = match bumpiness(&dg, &roi, params.sigma_px) {
        Ok(v) => v,
        Err(DifxError::NoSignal(_)) => return Ok(EstimateReport::no_signal()),
        Err(e) => return Err(e),
    };
    let chroma = match chromaticity(&d, &roi) {
        Ok(v) => v,
        Err(DifxError::NoSignal(_)) => return Ok(EstimateReport::no_signal()),
        Err(e) => return Err(e),
    };
    Ok(EstimateReport {
        width_rms_px: Some(w_rms),
        height_rms_px: Some(h_rms),
        gravity_center: Some(center),
        mask_area_px: Some(mask.popcount() as u64),
        bumpiness: Some(bump),
        chromaticity: Some(chroma),
        no_signal: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mix64;

    fn mask_from(coords: &[(usize, usize)], w: usize, h: usize) -> BinaryMask {
        let mut mask = BinaryMask::new(w, h);
        for &(x, y) in coords {
            mask.set(x, y, true);
        }
        mask
    }

    fn random_mask(w: usize, h: usize, seed: u64) -> BinaryMask {
        let mut mask = BinaryMask::new(w, h);
        let mut state = seed;
        for y in 0..h {
            for x in 0..w {
                state = mix64(state.wrapping_add(1));
                if state & 3 == 0 {
                    mask.set(x, y, true);
                }
            }
        }
        if mask.popcount() == 0 {
            mask.set(w / 2, h / 2, true);
        }
        mask
    }

    /// Independent double-loop recomputation of gravity center and RMS
    /// extents, structured unlike the production single pass.
    fn brute_force_stats(mask: &BinaryMask) -> ((f64, f64), (f64, f64)) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for y in 0..mask.height() {
            for x in 0..mask.width() {
                if mask.get(x, y) {
                    xs.push(x as f64);
                    ys.push(y as f64);
                }
            }
        }
        let n = xs.len() as f64;
        let cx = xs.iter().sum::<f64>() / n;
        let cy = ys.iter().sum::<f64>() / n;
        let wr = (xs.iter().map(|x| (x - cx) * (x - cx)).sum::<f64>() / n).sqrt();
        let hr = (ys.iter().map(|y| (y - cy) * (y - cy)).sum::<f64>() / n).sqrt();
        ((cx, cy), (wr, hr))
    }

    #[test]
    fn gravity_center_examples() {
        let single = mask_from(&[(10, 20)], 32, 32);
        assert_eq!(gravity_center(&single).unwrap(), (10.0, 20.0));
        let pair = mask_from(&[(0, 5), (2, 5)], 8, 8);
        assert_eq!(gravity_center(&pair).unwrap(), (1.0, 5.0));
        assert!(gravity_center(&BinaryMask::new(4, 4)).is_err());
    }

    #[test]
    fn rms_extent_examples() {
        let single = mask_from(&[(3, 3)], 8, 8);
        assert_eq!(rms_extent(&single, (3.0, 3.0)).unwrap(), (0.0, 0.0));
        let pair = mask_from(&[(0, 5), (2, 5)], 8, 8);
        let (w, h) = rms_extent(&pair, (1.0, 5.0)).unwrap();
        assert_eq!((w, h), (1.0, 0.0));
    }

    #[test]
    fn estimator_oracle_on_random_masks() {
        for seed in 0..25 {
            let mask = random_mask(37, 23, seed);
            let center = gravity_center(&mask).unwrap();
            let extent = rms_extent(&mask, center).unwrap();
            let (bf_center, bf_extent) = brute_force_stats(&mask);
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-30);
            assert!(rel(center.0, bf_center.0) < 1e-9);
            assert!(rel(center.1, bf_center.1) < 1e-9);
            assert!(rel(extent.0, bf_extent.0) < 1e-9);
            assert!(rel(extent.1, bf_extent.1) < 1e-9);
        }
    }

    #[test]
    fn make_roi_examples() {
        let roi = make_roi((50.0, 50.0), 10.0, 10.0, 2.0, (200, 200));
        assert_eq!((roi.x0, roi.x1, roi.y0, roi.y1), (30, 70, 30, 70));

        let clipped = make_roi((0.0, 0.0), 10.0, 10.0, 2.0, (200, 200));
        assert_eq!((clipped.x0, clipped.y0), (0, 0));
        assert_eq!((clipped.x1, clipped.y1), (20, 20));

        let minimum = make_roi((50.0, 50.0), 0.0, 0.0, 2.0, (200, 200));
        assert_eq!(minimum.half_width_px, 1.0);
        assert_eq!((minimum.x0, minimum.x1), (49, 51));
        assert!(minimum.area() >= 1);
    }

    #[test]
    fn bumpiness_constant_region_is_zero() {
        let dg = GrayImageF::from_pixels(40, 40, vec![0.7; 1600]);
        let roi = make_roi((20.0, 20.0), 8.0, 8.0, 2.0, (40, 40));
        let b = bumpiness(&dg, &roi, 5.0).unwrap();
        assert!(b.abs() < 1e-12, "{b}");
    }

    #[test]
    fn bumpiness_rejects_nonpositive_mean() {
        let dg = GrayImageF::from_pixels(10, 10, vec![-0.1; 100]);
        let roi = make_roi((5.0, 5.0), 2.0, 2.0, 2.0, (10, 10));
        assert!(matches!(
            bumpiness(&dg, &roi, 5.0),
            Err(DifxError::NoSignal(_))
        ));
    }

    /// Direct (non-separable) 2D reimplementation of the bumpiness chain,
    /// used as an independent oracle.
    fn bumpiness_oracle(crop: &Plane, sigma: f64) -> f64 {
        let radius = (3.0 * sigma).ceil() as isize;
        let mut taps = Vec::new();
        let mut sum = 0.0;
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                let w =
                    (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
                taps.push((dx, dy, w));
                sum += w;
            }
        }
        let smooth = |x: isize, y: isize| -> f64 {
            taps.iter()
                .map(|&(dx, dy, w)| w * crop.get_clamped(x + dx, y + dy))
                .sum::<f64>()
                / sum
        };
        let mut mean_rg = 0.0;
        for y in 0..crop.h as isize {
            for x in 0..crop.w as isize {
                let cx = |xx: isize, yy: isize| {
                    smooth(xx.clamp(0, crop.w as isize - 1), yy.clamp(0, crop.h as isize - 1))
                };
                let gx = cx(x - 1, y) - cx(x + 1, y);
                let gy = cx(x, y - 1) - cx(x, y + 1);
                mean_rg += (gx * gx + gy * gy).sqrt();
            }
        }
        mean_rg /= (crop.w * crop.h) as f64;
        mean_rg / crop.mean()
    }

    #[test]
    fn bumpiness_linear_ramp_closed_form() {
        // dg(x, y) = x + 1 over the whole image; ROI interior pixels see a
        // [1,0,-1] response of exactly 2 after smoothing (Gaussian smoothing
        // is exact on a ramp away from the edges).
        let w = 48;
        let h = 40;
        let pixels: Vec<f32> = (0..w * h).map(|i| (i % w) as f32 + 1.0).collect();
        let dg = GrayImageF::from_pixels(w, h, pixels);
        let roi = Roi {
            center: (23.5, 19.5),
            half_width_px: 20.0,
            half_height_px: 16.0,
            x0: 3,
            y0: 3,
            x1: 43,
            y1: 36,
        };
        let crop = crop_gray(&dg, &roi);
        let smoothed = gaussian_smooth(&crop, 5.0);
        let rg = gradient_magnitude(&smoothed);
        // Interior: beyond both the kernel radius (15) and the stencil.
        let interior = rg.get(17, 17);
        assert!((interior - 2.0).abs() < 1e-9, "interior gradient {interior}");

        // Full value including edge handling against the direct 2D oracle.
        let got = bumpiness(&dg, &roi, 5.0).unwrap();
        let want = bumpiness_oracle(&crop, 5.0);
        assert!((got - want).abs() / want < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn bumpiness_is_scale_invariant() {
        let w = 30;
        let h = 30;
        let pixels: Vec<f32> = (0..w * h)
            .map(|i| {
                let bits = mix64(i as u64 + 9);
                ((bits >> 11) as f64 / (1u64 << 53) as f64) as f32 + 0.2
            })
            .collect();
        let dg = GrayImageF::from_pixels(w, h, pixels.clone());
        let scaled = GrayImageF::from_pixels(w, h, pixels.iter().map(|v| v * 4.0).collect());
        let roi = make_roi((15.0, 15.0), 5.0, 5.0, 2.0, (w, h));
        let a = bumpiness(&dg, &roi, 5.0).unwrap();
        let b = bumpiness(&scaled, &roi, 5.0).unwrap();
        assert!((a - b).abs() / a < 1e-9);
    }

    #[test]
    fn chromaticity_examples() {
        let mk = |px: [f32; 3]| ImageF::from_pixels(4, 4, vec![px; 16]);
        let roi = make_roi((1.5, 1.5), 1.0, 1.0, 1.0, (4, 4));
        assert_eq!(chromaticity(&mk([1.0, 1.0, 0.0]), &roi).unwrap(), [0.5, 0.5, 0.0]);
        assert_eq!(
            chromaticity(&mk([2.0, 1.0, 1.0]), &roi).unwrap(),
            [0.5, 0.25, 0.25]
        );
        let out = chromaticity(&mk([0.3, 0.5, 0.1]), &roi).unwrap();
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(chromaticity(&mk([0.0, 0.0, 0.0]), &roi).is_err());
    }

    fn synthetic_pair(w: usize, h: usize) -> (ImageF, ImageF) {
        let p2 = ImageF::from_pixels(w, h, vec![[0.2, 0.2, 0.2]; w * h]);
        let mut p1 = p2.clone();
        for y in h / 4..h / 2 {
            for x in w / 4..3 * w / 4 {
                let bump = 0.05 + 0.1 * ((x * 7 + y * 13) % 5) as f32 / 5.0;
                p1.set(x, y, [0.2 + bump, 0.2 + bump * 0.5, 0.2]);
            }
        }
        (p1, p2)
    }

    #[test]
    fn estimate_all_identical_pair_is_no_signal() {
        let img = ImageF::from_pixels(16, 9, vec![[0.4, 0.3, 0.2]; 144]);
        let report = estimate_all(&img, &img, &EstimateParams::default()).unwrap();
        assert!(report.no_signal);
        assert!(report.width_rms_px.is_none());
        assert!(report.chromaticity.is_none());
    }

    #[test]
    fn estimate_all_synthetic_patch() {
        let (p1, p2) = synthetic_pair(64, 36);
        let report = estimate_all(&p1, &p2, &EstimateParams::default()).unwrap();
        assert!(!report.no_signal);
        assert!(report.width_rms_px.unwrap() > 0.0);
        assert!(report.height_rms_px.unwrap() > 0.0);
        assert!(report.bumpiness.unwrap() > 0.0);
        let chroma = report.chromaticity.unwrap();
        assert!((chroma.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(chroma[0] > chroma[1] && chroma[1] > chroma[2]);
    }

    #[test]
    fn estimate_all_invariant_under_difference_scaling() {
        let (p1, p2) = synthetic_pair(64, 36);
        for scale in [4.0f32, 3.7] {
            let mut p1_scaled = p2.clone();
            for (out, (a, b)) in p1_scaled
                .pixels_mut()
                .iter_mut()
                .zip(p1.pixels().iter().zip(p2.pixels()))
            {
                for c in 0..3 {
                    out[c] = b[c] + scale * (a[c] - b[c]);
                }
            }
            let base = estimate_all(&p1, &p2, &EstimateParams::default()).unwrap();
            let scaled = estimate_all(&p1_scaled, &p2, &EstimateParams::default()).unwrap();
            let close = |a: f64, b: f64| (a - b).abs() / a.abs().max(1e-12) < 1e-5;
            assert_eq!(base.mask_area_px, scaled.mask_area_px, "scale {scale}");
            assert!(close(base.width_rms_px.unwrap(), scaled.width_rms_px.unwrap()));
            assert!(close(base.height_rms_px.unwrap(), scaled.height_rms_px.unwrap()));
            assert!(close(base.bumpiness.unwrap(), scaled.bumpiness.unwrap()));
            for c in 0..3 {
                assert!(close(
                    base.chromaticity.unwrap()[c].max(1e-12),
                    scaled.chromaticity.unwrap()[c].max(1e-12)
                ));
            }
        }
    }

    #[test]
    fn report_json_shape() {
        let (p1, p2) = synthetic_pair(64, 36);
        let report = estimate_all(&p1, &p2, &EstimateParams::default()).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        for key in [
            "width_rms_px",
            "height_rms_px",
            "gravity_center",
            "mask_area_px",
            "bumpiness",
            "chromaticity",
            "no_signal",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        let empty = estimate_all(&p2, &p2, &EstimateParams::default()).unwrap();
        let json = serde_json::to_value(&empty).unwrap();
        assert_eq!(json.as_object().unwrap().len(), 1, "only no_signal serialized");
    }
}
