//! Jacket surface irregularities: a seeded field of randomly placed bumps.
//!
//! The height map only perturbs shading normals (bump mapping); the jacket
//! geometry itself stays a flat rectangle. Each bump is a cosine-squared cap,
//! which is C¹ everywhere, so analytic gradients match finite differences and
//! reflected directions vary smoothly across the surface.
//!
//! Bump centers are drawn once over the *maximum* legal jacket rectangle and
//! then restricted to the actual one. Restriction of a uniform point process
//! is uniform, the expected density stays at one bump per characteristic
//! width squared, and — crucially for parameter sweeps — growing the jacket
//! keeps every existing bump and only adds new ones at the fresh margin.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::mix64;
use crate::render::geom::Vec3;
use crate::scene::{JacketConfig, JACKET_MAX_HEIGHT_M, JACKET_MAX_WIDTH_M};

const BUMP_SALT: u64 = 0x42_554d_5053; // "BUMPS"

/// Height field over the jacket rectangle, fully determined by
/// (seed, jacket dimensions, characteristic width, depth).
#[derive(Debug, Clone)]
pub struct BumpField {
    pub seed: u64,
    /// Bump centers in jacket coordinates: u across the width
    /// (centered on zero), v up from the bottom edge. Meters.
    pub bump_centers: Vec<(f64, f64)>,
    /// Support radius of each bump (= characteristic width / 2).
    pub bump_radius_m: f64,
    /// Peak bump height.
    pub depth_m: f64,
}

/// Draws the bump centers for a jacket. Deterministic in `seed`; a zero-area
/// jacket gets no bumps.
pub fn build_bump_field(jacket: &JacketConfig, seed: u64) -> BumpField {
    let radius = jacket.bump_char_width_m / 2.0;
    let depth_m = jacket.bump_depth_cm / 100.0;
    let half_w = jacket.width_m / 2.0;
    let height = jacket.height_m;

    let mut bump_centers = Vec::new();
    if jacket.width_m > 0.0 && jacket.height_m > 0.0 && jacket.bump_char_width_m > 0.0 {
        let master_area = JACKET_MAX_WIDTH_M * JACKET_MAX_HEIGHT_M;
        let cell = jacket.bump_char_width_m * jacket.bump_char_width_m;
        let master_count = (master_area / cell).ceil() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(mix64(seed ^ BUMP_SALT));
        for _ in 0..master_count {
            let u = rng.random_range(-JACKET_MAX_WIDTH_M / 2.0..=JACKET_MAX_WIDTH_M / 2.0);
            let v = rng.random_range(0.0..=JACKET_MAX_HEIGHT_M);
            if u.abs() <= half_w && v <= height {
                bump_centers.push((u, v));
            }
        }
    }

    BumpField {
        seed,
        bump_centers,
        bump_radius_m: radius,
        depth_m,
    }
}

impl BumpField {
    /// Height above the jacket plane at (u, v), along the outward normal.
    /// Sum of the cosine-squared caps: `depth · cos²(π·r / (2·radius))` for
    /// each bump with center distance r below the support radius.
    pub fn height(&self, u: f64, v: f64) -> f64 {
        if self.depth_m == 0.0 {
            return 0.0;
        }
        let mut h = 0.0;
        for &(cu, cv) in &self.bump_centers {
            let r = ((u - cu).powi(2) + (v - cv).powi(2)).sqrt();
            if r < self.bump_radius_m {
                let c = (PI * r / (2.0 * self.bump_radius_m)).cos();
                h += self.depth_m * c * c;
            }
        }
        h
    }

    /// Analytic gradient (∂h/∂u, ∂h/∂v) of [`Self::height`].
    pub fn gradient(&self, u: f64, v: f64) -> (f64, f64) {
        if self.depth_m == 0.0 {
            return (0.0, 0.0);
        }
        let mut gu = 0.0;
        let mut gv = 0.0;
        for &(cu, cv) in &self.bump_centers {
            let du = u - cu;
            let dv = v - cv;
            let r = (du * du + dv * dv).sqrt();
            if r > 0.0 && r < self.bump_radius_m {
                // d/dr [depth·cos²(π r / 2R)] = -depth·π/(2R)·sin(π r / R)
                let slope = -self.depth_m * PI / (2.0 * self.bump_radius_m)
                    * (PI * r / self.bump_radius_m).sin();
                gu += slope * du / r;
                gv += slope * dv / r;
            }
        }
        (gu, gv)
    }

    /// Shading normal at (u, v): the geometric normal (0, 0, -1) tilted by
    /// the height-field gradient and renormalized. The flat case returns the
    /// geometric normal exactly.
    pub fn perturbed_normal(&self, u: f64, v: f64) -> Vec3 {
        let (gu, gv) = self.gradient(u, v);
        if gu == 0.0 && gv == 0.0 {
            return Vec3::new(0.0, 0.0, -1.0);
        }
        Vec3::new(-gu, -gv, -1.0).normalized()
    }
}
