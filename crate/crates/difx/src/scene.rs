//! Scene parameterization: defaults, validation, and sweep-point generation.
//!
//! The scene family is deliberately narrow: one brown ground plane, one black
//! wall, one white point light, a pinhole camera, and (optionally) a
//! reflective rectangular jacket standing behind the camera. All defaults are
//! collected in [`default_scene`]; the parameter-reference table below is the
//! authoritative list.
//!
//! | parameter                | default              |
//! |--------------------------|----------------------|
//! | ground color             | (0.80, 0.55, 0.35)   |
//! | wall width × height      | 1 m × 1.9 m (black)  |
//! | ground/wall ambient      | 0.1                  |
//! | ground/wall diffuse      | 0.9                  |
//! | camera height            | 1.5 m                |
//! | camera–wall distance     | 2 m                  |
//! | camera horizontal FOV    | 90°                  |
//! | light height             | 3 m                  |
//! | light behind wall        | 1 m                  |
//! | light power              | [`DEFAULT_LIGHT_POWER`] |
//! | resolution               | 1600 × 900           |
//! | jacket width × height    | 0.75 m × 1.5 m       |
//! | jacket bump depth        | 10 cm                |
//! | jacket bump char. width  | 0.30 m               |
//! | jacket color             | (1, 1, 0)            |
//! | jacket offset behind cam | 0.3 m                |
//! | photon count             | 20 × 10⁶             |

use serde::{Deserialize, Serialize};

use crate::{DifxError, Result};

/// Radiant intensity of the white point light, in the renderer's linear
/// units. Calibrated once so that the brightest directly lit floor pixel of
/// the default photographer-absent render lands at ≈ 0.5, then frozen.
pub const DEFAULT_LIGHT_POWER: f64 = 18.0;

/// Largest legal jacket width; doubles as the bump-field master domain width.
pub const JACKET_MAX_WIDTH_M: f64 = 1.5;
/// Largest legal jacket height; doubles as the bump-field master domain height.
pub const JACKET_MAX_HEIGHT_M: f64 = 2.0;

/// Linear-light RGB triple. Serializes as a 3-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Rgb {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl Rgb {
    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Self { r, g, b }
    }

    pub const BLACK: Rgb = Rgb::new(0.0, 0.0, 0.0);

    pub fn channels(&self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }
}

impl From<[f64; 3]> for Rgb {
    fn from(v: [f64; 3]) -> Self {
        Rgb::new(v[0], v[1], v[2])
    }
}

impl From<Rgb> for [f64; 3] {
    fn from(c: Rgb) -> Self {
        [c.r, c.g, c.b]
    }
}

/// The photographer's jacket: a reflective rectangle facing the wall,
/// bottom edge on the floor, centered on the camera's horizontal position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JacketConfig {
    /// Width in meters, within [0, 1.5]. Zero yields a degenerate (absent)
    /// photographer.
    pub width_m: f64,
    /// Height in meters, within [0, 2].
    pub height_m: f64,
    /// Maximum bump height normal to the surface, centimeters in [0, 20].
    /// Zero means a perfectly flat surface.
    pub bump_depth_cm: f64,
    /// Characteristic bump width parallel to the surface, meters.
    pub bump_char_width_m: f64,
    /// Per-channel reflectance of the jacket material.
    pub color: Rgb,
    /// Distance from the camera to the jacket plane, along the view axis
    /// away from the wall.
    pub offset_behind_camera_m: f64,
}

/// Renderer knobs that do not change the scene itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderSettings {
    /// Photons emitted toward the jacket.
    pub photon_count: u64,
    /// Neighborhood size of the k-nearest photon gather.
    pub gather_k: usize,
    /// Default render seed (CLI `--seed` overrides it).
    pub seed: u64,
    /// Photons per deterministic batch; each batch owns an RNG stream
    /// derived from the render seed, so output is thread-count independent.
    pub batch_size: u64,
}

/// Full parameterization of the scene, camera, light, jacket, and renderer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub ground_color: Rgb,
    pub wall_width_m: f64,
    pub wall_height_m: f64,
    pub wall_ambient: f64,
    pub wall_diffuse: f64,
    pub ground_ambient: f64,
    pub ground_diffuse: f64,
    pub camera_height_m: f64,
    pub camera_wall_distance_m: f64,
    pub camera_hfov_deg: f64,
    pub light_height_m: f64,
    pub light_behind_wall_m: f64,
    pub light_power: f64,
    /// (width_px, height_px).
    pub resolution: (u32, u32),
    pub jacket: JacketConfig,
    pub render: RenderSettings,
}

/// The default configuration: full 1600×900 resolution and 20×10⁶ photons.
pub fn default_scene() -> SceneConfig {
    SceneConfig {
        ground_color: Rgb::new(0.80, 0.55, 0.35),
        wall_width_m: 1.0,
        wall_height_m: 1.9,
        wall_ambient: 0.1,
        wall_diffuse: 0.9,
        ground_ambient: 0.1,
        ground_diffuse: 0.9,
        camera_height_m: 1.5,
        camera_wall_distance_m: 2.0,
        camera_hfov_deg: 90.0,
        light_height_m: 3.0,
        light_behind_wall_m: 1.0,
        light_power: DEFAULT_LIGHT_POWER,
        resolution: (1600, 900),
        jacket: JacketConfig {
            width_m: 0.75,
            height_m: 1.5,
            bump_depth_cm: 10.0,
            bump_char_width_m: 0.30,
            color: Rgb::new(1.0, 1.0, 0.0),
            offset_behind_camera_m: 0.3,
        },
        render: RenderSettings {
            photon_count: 20_000_000,
            gather_k: 200,
            seed: 0,
            batch_size: 16_384,
        },
    }
}

/// Desk-scale preset: same scene, 400×225 resolution, 10⁶ photons, k = 60.
/// Runs a full sweep in minutes instead of hours.
pub fn desk_scene() -> SceneConfig {
    let mut scene = default_scene();
    scene.resolution = (400, 225);
    scene.render.photon_count = 1_000_000;
    scene.render.gather_k = 60;
    scene
}

/// A single violated invariant, with the offending field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Result of [`validate`]: empty means the config is usable.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationResult {
    pub violations: Vec<Violation>,
}

impl ValidationResult {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, field: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            field: field.to_string(),
            message: message.into(),
        });
    }

    /// Convert to an error suitable for CLI exit-code mapping.
    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            let list: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
            Err(DifxError::InvalidConfig(list.join("; ")))
        }
    }
}

/// Checks every invariant of the configuration. Violations are returned,
/// not raised; an empty list means the scene is renderable.
pub fn validate(config: &SceneConfig) -> ValidationResult {
    let mut out = ValidationResult::default();

    let unit = |out: &mut ValidationResult, field: &str, v: f64| {
        if !(0.0..=1.0).contains(&v) || !v.is_finite() {
            out.push(field, format!("{v} outside [0, 1]"));
        }
    };
    for (field, v) in [
        ("ground_color.r", config.ground_color.r),
        ("ground_color.g", config.ground_color.g),
        ("ground_color.b", config.ground_color.b),
        ("jacket.color.r", config.jacket.color.r),
        ("jacket.color.g", config.jacket.color.g),
        ("jacket.color.b", config.jacket.color.b),
        ("wall_ambient", config.wall_ambient),
        ("wall_diffuse", config.wall_diffuse),
        ("ground_ambient", config.ground_ambient),
        ("ground_diffuse", config.ground_diffuse),
    ] {
        unit(&mut out, field, v);
    }
    if config.wall_ambient + config.wall_diffuse > 1.0 {
        out.push("wall_ambient", "ambient + diffuse exceeds 1");
    }
    if config.ground_ambient + config.ground_diffuse > 1.0 {
        out.push("ground_ambient", "ambient + diffuse exceeds 1");
    }

    let positive = |out: &mut ValidationResult, field: &str, v: f64| {
        if !v.is_finite() || v <= 0.0 {
            out.push(field, format!("{v} is not strictly positive"));
        }
    };
    for (field, v) in [
        ("wall_width_m", config.wall_width_m),
        ("wall_height_m", config.wall_height_m),
        ("camera_height_m", config.camera_height_m),
        ("camera_wall_distance_m", config.camera_wall_distance_m),
        ("light_height_m", config.light_height_m),
        ("light_behind_wall_m", config.light_behind_wall_m),
        ("light_power", config.light_power),
        ("jacket.bump_char_width_m", config.jacket.bump_char_width_m),
    ] {
        positive(&mut out, field, v);
    }

    if !(config.camera_hfov_deg > 0.0 && config.camera_hfov_deg < 180.0) {
        out.push(
            "camera_hfov_deg",
            format!("{} outside (0, 180)", config.camera_hfov_deg),
        );
    }
    if config.resolution.0 == 0 || config.resolution.1 == 0 {
        out.push("resolution", "zero pixels");
    }

    // Jacket dimensions may be zero (degenerate photographer) but not negative.
    if !(0.0..=JACKET_MAX_WIDTH_M).contains(&config.jacket.width_m) {
        out.push(
            "jacket.width_m",
            format!("{} outside [0, {JACKET_MAX_WIDTH_M}]", config.jacket.width_m),
        );
    }
    if !(0.0..=JACKET_MAX_HEIGHT_M).contains(&config.jacket.height_m) {
        out.push(
            "jacket.height_m",
            format!("{} outside [0, {JACKET_MAX_HEIGHT_M}]", config.jacket.height_m),
        );
    }
    if !(0.0..=20.0).contains(&config.jacket.bump_depth_cm) {
        out.push(
            "jacket.bump_depth_cm",
            format!("{} outside [0, 20]", config.jacket.bump_depth_cm),
        );
    }
    if !config.jacket.offset_behind_camera_m.is_finite() {
        out.push("jacket.offset_behind_camera_m", "not finite");
    }

    if config.render.photon_count == 0 {
        out.push("render.photon_count", "must be positive");
    }
    if config.render.gather_k == 0 {
        out.push("render.gather_k", "must be at least 1");
    }
    if config.render.batch_size == 0 {
        out.push("render.batch_size", "must be positive");
    }

    out
}

/// `n` equally spaced values covering [low, high], endpoints included.
pub fn sweep_points(low: f64, high: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(DifxError::InvalidArgument(format!(
            "sweep needs at least 2 points, got {n}"
        )));
    }
    if low.is_nan() || high.is_nan() || low > high {
        return Err(DifxError::InvalidArgument(format!(
            "sweep range is inverted: {low} > {high}"
        )));
    }
    let span = high - low;
    let last = n - 1;
    Ok((0..n)
        .map(|i| {
            if i == 0 {
                low
            } else if i == last {
                high
            } else {
                low + span * (i as f64 / last as f64)
            }
        })
        .collect())
}

/// Parses a scene from its JSON document. Unknown keys are rejected.
pub fn scene_from_json(json: &str) -> Result<SceneConfig> {
    serde_json::from_str(json).map_err(|e| DifxError::InvalidConfig(e.to_string()))
}

/// Serializes a scene to the JSON document format accepted by `--config`.
pub fn scene_to_json(config: &SceneConfig) -> String {
    serde_json::to_string_pretty(config).expect("scene configs always serialize")
}
