//! Experiment harness: four single-parameter sweeps across the SNR grid.
//!
//! For every swept value the scene pair (photographer present / absent) is
//! rendered once, noiselessly, and cached on disk; every SNR level then draws
//! its own noise over the cached pair and runs the estimation pipeline.
//!
//! Seed derivation is fixed and documented so any row can be reproduced in
//! isolation:
//!
//! * render seed (shared by the whole sweep, keeps photon draws and the bump
//!   field common across values): `mix64(base_seed ^ 0x52454e444552)`
//! * noise seed per (value v, SNR level s, image of the pair r — 1 for
//!   present, 2 for absent): chained SplitMix64 steps
//!   `m3(m2(m1(base_seed ^ 0x4e4f495345)))` where `m1` adds
//!   `(v+1)·GOLDEN_GAMMA`, `m2` adds `(s+1)·GOLDEN_GAMMA`, and `m3` adds `r`,
//!   each followed by `mix64`.

mod cache;
mod csv;
mod svg;

pub use cache::{cache_key, RenderCache};
pub use csv::{read_csv, write_csv, CsvRow, CSV_HEADER};
pub use svg::{render_plot_svg, render_plot_svg_from_rows};

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::estimate::{estimate_all, EstimateParams, EstimateReport};
use crate::noise::{add_gaussian_snr, SnrLevel};
use crate::scene::{desk_scene, default_scene, sweep_points, validate, SceneConfig};
use crate::util::{mix64, GOLDEN_GAMMA};
use crate::{DifxError, Result};

const RENDER_TAG: u64 = 0x5245_4e44_4552; // "RENDER"
const NOISE_TAG: u64 = 0x004e_4f49_5345; // "NOISE"

/// Which scene parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Width,
    Height,
    BumpDepth,
    Green,
}

impl SweepParameter {
    /// CLI/CSV token.
    pub fn token(&self) -> &'static str {
        match self {
            SweepParameter::Width => "width",
            SweepParameter::Height => "height",
            SweepParameter::BumpDepth => "bump",
            SweepParameter::Green => "green",
        }
    }

    pub fn from_token(token: &str) -> Result<Self> {
        match token {
            "width" => Ok(SweepParameter::Width),
            "height" => Ok(SweepParameter::Height),
            "bump" => Ok(SweepParameter::BumpDepth),
            "green" => Ok(SweepParameter::Green),
            other => Err(DifxError::InvalidArgument(format!(
                "unknown sweep parameter `{other}` (expected width|height|bump|green)"
            ))),
        }
    }

    /// Default sweep range: width 0.5–1.5 m, height 1–2 m, bump 0–20 cm,
    /// green channel 0–1.
    pub fn default_range(&self) -> (f64, f64) {
        match self {
            SweepParameter::Width => (0.5, 1.5),
            SweepParameter::Height => (1.0, 2.0),
            SweepParameter::BumpDepth => (0.0, 20.0),
            SweepParameter::Green => (0.0, 1.0),
        }
    }

    /// Unit suffix for plots.
    pub fn unit(&self) -> &'static str {
        match self {
            SweepParameter::Width | SweepParameter::Height => "m",
            SweepParameter::BumpDepth => "cm",
            SweepParameter::Green => "",
        }
    }

    /// Which report field tracks this parameter, with its plot label.
    pub fn estimate_label(&self) -> &'static str {
        match self {
            SweepParameter::Width => "W_RMS (px)",
            SweepParameter::Height => "H_RMS (px)",
            SweepParameter::BumpDepth => "bumpiness",
            SweepParameter::Green => "G' (chromaticity)",
        }
    }

    pub fn extract(&self, report: &EstimateReport) -> Option<f64> {
        match self {
            SweepParameter::Width => report.width_rms_px,
            SweepParameter::Height => report.height_rms_px,
            SweepParameter::BumpDepth => report.bumpiness,
            SweepParameter::Green => report.chromaticity.map(|c| c[1]),
        }
    }

    /// Applies a swept value onto a base scene; all other parameters stay
    /// at the base values.
    pub fn apply(&self, base: &SceneConfig, value: f64) -> SceneConfig {
        let mut scene = base.clone();
        match self {
            SweepParameter::Width => scene.jacket.width_m = value,
            SweepParameter::Height => scene.jacket.height_m = value,
            SweepParameter::BumpDepth => scene.jacket.bump_depth_cm = value,
            SweepParameter::Green => scene.jacket.color.g = value,
        }
        scene
    }
}

/// Scene scale preset for the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 400×225, 10⁶ photons, gather k = 60.
    Desk,
    /// 1600×900, 20×10⁶ photons, gather k = 200.
    Paper,
}

impl Preset {
    pub fn scene(&self) -> SceneConfig {
        match self {
            Preset::Desk => desk_scene(),
            Preset::Paper => default_scene(),
        }
    }

    pub fn from_token(token: &str) -> Result<Self> {
        match token {
            "desk" => Ok(Preset::Desk),
            "paper" => Ok(Preset::Paper),
            other => Err(DifxError::InvalidArgument(format!(
                "unknown preset `{other}` (expected desk|paper)"
            ))),
        }
    }
}

/// Full description of one sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub low: f64,
    pub high: f64,
    pub n_points: usize,
    pub snr_levels: Vec<SnrLevel>,
    pub base_seed: u64,
    /// Base scene; the swept field is overwritten per value.
    pub scene: SceneConfig,
}

impl SweepSpec {
    /// Sweep over the parameter's default range with 8 points and the
    /// default SNR grid.
    pub fn new(parameter: SweepParameter, scene: SceneConfig, base_seed: u64) -> Self {
        let (low, high) = parameter.default_range();
        Self {
            parameter,
            low,
            high,
            n_points: 8,
            snr_levels: SnrLevel::default_grid(),
            base_seed,
            scene,
        }
    }
}

/// One (parameter value, SNR level) cell of a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub snr: SnrLevel,
    /// Noise seeds of the (present, absent) images.
    pub seed_pair: (u64, u64),
    pub report: EstimateReport,
    pub wall_time_s: f64,
}

/// Reproducibility block attached to every table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    /// Hash over (scene, sweep definition, seeds).
    pub config_hash: String,
    pub code_version: String,
    /// Estimation tunables used for every row.
    pub tau: f64,
    pub alpha: f64,
    pub sigma_px: f64,
}

/// Rows of one sweep, sorted by (value, SNR).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepTable {
    pub parameter: SweepParameter,
    pub rows: Vec<SweepRow>,
    pub provenance: Provenance,
}

impl SweepTable {
    /// Estimates of this table's tracked column at one SNR level, ordered by
    /// parameter value.
    pub fn column(&self, snr: SnrLevel) -> Vec<(f64, Option<f64>)> {
        self.rows
            .iter()
            .filter(|r| r.snr == snr)
            .map(|r| (r.value, self.parameter.extract(&r.report)))
            .collect()
    }
}

/// Render seed used for every value of a sweep. Sharing one seed keeps the
/// photon directions and bump centers common across values, so estimates
/// respond to the swept parameter rather than to Monte Carlo resampling.
pub fn render_seed(base_seed: u64) -> u64 {
    mix64(base_seed ^ RENDER_TAG)
}

/// Noise seed of one image: `role` is 1 for the photographer-present image,
/// 2 for the absent one. Never reused across a pair.
pub fn noise_seed(base_seed: u64, value_index: usize, snr_index: usize, role: u64) -> u64 {
    let s = mix64(base_seed ^ NOISE_TAG);
    let s = mix64(s.wrapping_add((value_index as u64 + 1).wrapping_mul(GOLDEN_GAMMA)));
    let s = mix64(s.wrapping_add((snr_index as u64 + 1).wrapping_mul(GOLDEN_GAMMA)));
    mix64(s.wrapping_add(role))
}

/// Runs the sweep. Renders go through `cache`; the estimation grid is
/// value-parallel with deterministically ordered output.
pub fn run_sweep(spec: &SweepSpec, cache: &RenderCache) -> Result<SweepTable> {
    if spec.snr_levels.is_empty() {
        return Err(DifxError::InvalidArgument("no SNR levels given".into()));
    }
    validate(&spec.scene).into_result()?;
    let values = sweep_points(spec.low, spec.high, spec.n_points)?;
    let mut snr_levels = spec.snr_levels.clone();
    snr_levels.sort_by(|a, b| {
        a.sort_value()
            .partial_cmp(&b.sort_value())
            .expect("SNR levels are never NaN")
    });
    let rseed = render_seed(spec.base_seed);
    let params = EstimateParams::default();

    let per_value: Vec<Vec<SweepRow>> = values
        .par_iter()
        .enumerate()
        .map(|(vi, &value)| -> Result<Vec<SweepRow>> {
            let scene = spec.parameter.apply(&spec.scene, value);
            validate(&scene).into_result()?;
            log::info!(
                "{} = {value}: rendering pair ({}/{})",
                spec.parameter.token(),
                vi + 1,
                values.len()
            );
            let p1 = cache.render(&scene, true, rseed)?;
            let p2 = cache.render(&scene, false, rseed)?;
            let mut rows = Vec::with_capacity(snr_levels.len());
            for (si, &snr) in snr_levels.iter().enumerate() {
                let s1 = noise_seed(spec.base_seed, vi, si, 1);
                let s2 = noise_seed(spec.base_seed, vi, si, 2);
                let start = Instant::now();
                let n1 = add_gaussian_snr(&p1, snr, s1)?;
                let n2 = add_gaussian_snr(&p2, snr, s2)?;
                let report = estimate_all(&n1, &n2, &params)?;
                rows.push(SweepRow {
                    value,
                    snr,
                    seed_pair: (s1, s2),
                    report,
                    wall_time_s: start.elapsed().as_secs_f64(),
                });
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;

    Ok(SweepTable {
        parameter: spec.parameter,
        rows: per_value.into_iter().flatten().collect(),
        provenance: Provenance {
            config_hash: cache_key(&spec.scene, false, spec.base_seed),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            tau: params.threshold.tau,
            alpha: params.alpha,
            sigma_px: params.sigma_px,
        },
    })
}

/// Number of adjacent strictly decreasing pairs (within a 1e-12 slack).
pub fn monotonicity_inversions(values: &[f64]) -> Result<usize> {
    if values.len() < 2 {
        return Err(DifxError::InvalidArgument(
            "need at least 2 values to count inversions".into(),
        ));
    }
    Ok(values
        .windows(2)
        .filter(|w| w[1] < w[0] - 1e-12)
        .count())
}

/// Pearson correlation coefficient.
pub fn linear_fit_r(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(DifxError::InvalidArgument(format!(
            "need at least 3 paired points, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(DifxError::InvalidArgument(
            "degenerate variance in correlation input".into(),
        ));
    }
    Ok(sxy / (sxx * syy).sqrt())
}
