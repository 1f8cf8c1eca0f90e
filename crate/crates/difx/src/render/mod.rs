//! Deterministic forward model.
//!
//! Direct lighting is analytic (shadow rays against the wall and, when
//! present, the jacket); indirect light is the photon map's irradiance
//! estimate. One primary ray per pixel center — the scene is analytic apart
//! from the photon gather, so there is no pixel-level Monte Carlo noise.
//!
//! `render_scene` is a pure function of (scene, present, seed): bit-identical
//! across runs and across worker counts.

pub mod bump;
pub mod geom;
pub mod kdtree;
pub mod photon;

pub use bump::{build_bump_field, BumpField};
pub use photon::{gather_irradiance, trace_photons, Deposit, PhotonMap, MIN_GATHER_RADIUS_M};

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::raster::ImageF;
use crate::scene::SceneConfig;
use geom::{hit_ground, Ray, Vec3, ZRect};

/// Pinhole camera aimed at the wall–floor junction midpoint.
#[derive(Debug, Clone, Copy)]
pub struct Camera {
    pub position: Vec3,
    forward: Vec3,
    right: Vec3,
    up: Vec3,
    tan_half_hfov: f64,
    tan_half_vfov: f64,
    width_px: u32,
    height_px: u32,
}

impl Camera {
    pub fn new(scene: &SceneConfig) -> Self {
        let position = Vec3::new(0.0, scene.camera_height_m, scene.camera_wall_distance_m);
        let aim = Vec3::ZERO; // midpoint of the wall's base edge
        let forward = (aim - position).normalized();
        let right = forward.cross(Vec3::new(0.0, 1.0, 0.0)).normalized();
        let up = right.cross(forward);
        let tan_half_hfov = (scene.camera_hfov_deg.to_radians() / 2.0).tan();
        let (width_px, height_px) = scene.resolution;
        // Square pixels: the vertical FOV follows from the aspect ratio.
        let tan_half_vfov = tan_half_hfov * height_px as f64 / width_px as f64;
        Self {
            position,
            forward,
            right,
            up,
            tan_half_hfov,
            tan_half_vfov,
            width_px,
            height_px,
        }
    }

    /// Ray through the center of pixel (px, py); py grows downward.
    pub fn primary_ray(&self, px: u32, py: u32) -> Ray {
        let ndc_x = (px as f64 + 0.5) / self.width_px as f64 * 2.0 - 1.0;
        let ndc_y = (py as f64 + 0.5) / self.height_px as f64 * 2.0 - 1.0;
        let dir = self.forward
            + self.right * (ndc_x * self.tan_half_hfov)
            + self.up * (-ndc_y * self.tan_half_vfov);
        Ray {
            origin: self.position,
            dir: dir.normalized(),
        }
    }
}

/// What a primary ray hit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Surface {
    Ground,
    Wall,
    Miss,
}

/// Scene geometry resolved into render-ready primitives.
struct Staged<'a> {
    scene: &'a SceneConfig,
    light: Vec3,
    wall: ZRect,
    /// Occluding jacket rectangle; `None` when absent or zero-area.
    jacket: Option<ZRect>,
    map: PhotonMap,
}

impl Staged<'_> {
    /// First surface along the ray. The jacket never shows up in primary
    /// rays — it stands behind the camera — so only ground and wall count.
    fn first_hit(&self, ray: &Ray) -> (Surface, f64) {
        let ground = hit_ground(ray);
        let wall = self.wall.hit(ray);
        match (ground, wall) {
            (Some(g), Some(w)) if w < g => (Surface::Wall, w),
            (Some(g), _) => (Surface::Ground, g),
            (None, Some(w)) => (Surface::Wall, w),
            (None, None) => (Surface::Miss, 0.0),
        }
    }

    fn occluded(&self, point: Vec3) -> bool {
        if self.wall.blocks_segment(point, self.light) {
            return true;
        }
        if let Some(jacket) = &self.jacket {
            if jacket.blocks_segment(point, self.light) {
                return true;
            }
        }
        false
    }

    fn shade(&self, ray: &Ray) -> [f64; 3] {
        let (surface, t) = self.first_hit(ray);
        let (color, ambient, diffuse, normal) = match surface {
            Surface::Ground => (
                self.scene.ground_color.channels(),
                self.scene.ground_ambient,
                self.scene.ground_diffuse,
                Vec3::new(0.0, 1.0, 0.0),
            ),
            Surface::Wall => {
                // The wall is black: every term multiplies to zero.
                return [0.0; 3];
            }
            Surface::Miss => return [0.0; 3],
        };
        let point = ray.at(t);

        let to_light = self.light - point;
        let dist2 = to_light.dot(to_light);
        let dir_l = to_light * (1.0 / dist2.sqrt());
        let cos_theta = normal.dot(dir_l);
        let direct = if cos_theta > 0.0 && !self.occluded(point) {
            self.scene.light_power * cos_theta / dist2
        } else {
            0.0
        };

        let indirect = if self.map.is_empty() {
            [0.0; 3]
        } else {
            gather_irradiance(&self.map, point, normal, self.scene.render.gather_k)
        };

        let mut px = [0.0; 3];
        for c in 0..3 {
            px[c] = ambient * color[c] + diffuse * color[c] * (direct + indirect[c]) / PI;
        }
        px
    }
}

/// Renders the scene from the camera's viewpoint. `present` adds the
/// photographer's jacket: it contributes photon-mapped indirect light and
/// occludes shadow rays, but never appears in a primary ray.
pub fn render_scene(scene: &SceneConfig, present: bool, seed: u64) -> ImageF {
    let map = trace_photons(scene, present, seed);
    let camera = Camera::new(scene);
    let jacket_rect = (present && scene.jacket.width_m > 0.0 && scene.jacket.height_m > 0.0)
        .then(|| ZRect {
            z: scene.camera_wall_distance_m + scene.jacket.offset_behind_camera_m,
            half_width: scene.jacket.width_m / 2.0,
            height: scene.jacket.height_m,
        });
    let staged = Staged {
        scene,
        light: Vec3::new(0.0, scene.light_height_m, -scene.light_behind_wall_m),
        wall: ZRect {
            z: 0.0,
            half_width: scene.wall_width_m / 2.0,
            height: scene.wall_height_m,
        },
        jacket: jacket_rect,
        map,
    };

    let (width, height) = scene.resolution;
    let mut img = ImageF::new(width as usize, height as usize);
    img.pixels_mut()
        .par_chunks_mut(width as usize)
        .enumerate()
        .for_each(|(py, row)| {
            for (px, out) in row.iter_mut().enumerate() {
                let ray = camera.primary_ray(px as u32, py as u32);
                let rgb = staged.shade(&ray);
                *out = [rgb[0] as f32, rgb[1] as f32, rgb[2] as f32];
            }
        });
    img
}

/// Classifies what the primary ray of a pixel hits, and whether that point
/// sees the light directly. Exposed for tests and diagnostics.
pub fn classify_pixel(scene: &SceneConfig, present: bool, px: u32, py: u32) -> (Surface, bool) {
    let camera = Camera::new(scene);
    let staged = Staged {
        scene,
        light: Vec3::new(0.0, scene.light_height_m, -scene.light_behind_wall_m),
        wall: ZRect {
            z: 0.0,
            half_width: scene.wall_width_m / 2.0,
            height: scene.wall_height_m,
        },
        jacket: (present && scene.jacket.width_m > 0.0 && scene.jacket.height_m > 0.0).then(
            || ZRect {
                z: scene.camera_wall_distance_m + scene.jacket.offset_behind_camera_m,
                half_width: scene.jacket.width_m / 2.0,
                height: scene.jacket.height_m,
            },
        ),
        map: PhotonMap::empty(),
    };
    let ray = camera.primary_ray(px, py);
    let (surface, t) = staged.first_hit(&ray);
    let lit = match surface {
        Surface::Ground => {
            let p = ray.at(t);
            let dir = (staged.light - p).normalized();
            dir.y > 0.0 && !staged.occluded(p)
        }
        _ => false,
    };
    (surface, lit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{default_scene, desk_scene};

    fn tiny_scene() -> SceneConfig {
        let mut s = desk_scene();
        s.resolution = (96, 54);
        s.render.photon_count = 60_000;
        s.render.gather_k = 30;
        s
    }

    fn bits(img: &ImageF) -> Vec<u32> {
        img.pixels().iter().flatten().map(|v| v.to_bits()).collect()
    }

    #[test]
    fn camera_looks_at_wall_base_midpoint() {
        let scene = default_scene();
        let cam = Camera::new(&scene);
        // The exact image center ray passes between the four central pixels;
        // the forward axis itself must hit (0, 0, 0).
        let t = -cam.position.y / cam.forward.y;
        let hit = cam.position + cam.forward * t;
        assert!(hit.x.abs() < 1e-12);
        assert!(hit.z.abs() < 1e-9);
    }

    #[test]
    fn render_is_deterministic() {
        let s = tiny_scene();
        let a = render_scene(&s, true, 42);
        let b = render_scene(&s, true, 42);
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn zero_width_jacket_equals_absent() {
        let mut s = tiny_scene();
        s.jacket.width_m = 0.0;
        let present = render_scene(&s, true, 9);
        let absent = render_scene(&s, false, 9);
        assert_eq!(bits(&present), bits(&absent));
    }

    #[test]
    fn absent_render_ignores_jacket_fields() {
        let mut a_scene = tiny_scene();
        let base = render_scene(&a_scene, false, 4);
        a_scene.jacket.width_m = 1.3;
        a_scene.jacket.color = crate::scene::Rgb::new(0.2, 0.9, 0.4);
        a_scene.jacket.bump_depth_cm = 19.0;
        let changed = render_scene(&a_scene, false, 4);
        assert_eq!(bits(&base), bits(&changed));
    }

    #[test]
    fn wall_shadow_darkens_floor() {
        let s = tiny_scene();
        let img = render_scene(&s, false, 0);
        let mut shadow_min = f64::INFINITY;
        let mut lit_values = Vec::new();
        for py in 0..s.resolution.1 {
            for px in 0..s.resolution.0 {
                let (surface, lit) = classify_pixel(&s, false, px, py);
                if surface != Surface::Ground {
                    continue;
                }
                let p = img.get(px as usize, py as usize);
                let gray = (p[0] as f64 + p[1] as f64 + p[2] as f64) / 3.0;
                if lit {
                    lit_values.push(gray);
                } else {
                    shadow_min = shadow_min.min(gray);
                }
            }
        }
        assert!(!lit_values.is_empty() && shadow_min.is_finite());
        lit_values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = lit_values[lit_values.len() / 2];
        assert!(
            shadow_min < 0.5 * median,
            "shadow {shadow_min} vs lit median {median}"
        );
    }

    #[test]
    fn jacket_only_adds_light_in_default_geometry() {
        let s = tiny_scene();
        let p1 = render_scene(&s, true, 5);
        let p2 = render_scene(&s, false, 5);
        let mut max_positive = 0.0f64;
        for (a, b) in p1.pixels().iter().zip(p2.pixels()) {
            for c in 0..3 {
                let d = a[c] as f64 - b[c] as f64;
                assert!(d >= -1e-9, "difference dipped negative: {d}");
                max_positive = max_positive.max(d);
            }
        }
        assert!(max_positive > 0.0, "jacket added no light at all");
    }

    #[test]
    fn brightest_lit_floor_pixel_near_half_scale() {
        // DEFAULT_LIGHT_POWER is calibrated to put this at ≈ 0.5.
        let s = desk_scene();
        let img = render_scene(&s, false, 0);
        let mut max_lit = 0.0f32;
        for py in 0..s.resolution.1 {
            for px in 0..s.resolution.0 {
                let (surface, lit) = classify_pixel(&s, false, px, py);
                if surface == Surface::Ground && lit {
                    max_lit = max_lit.max(img.get(px as usize, py as usize)[0]);
                }
            }
        }
        assert!(
            (0.44..=0.56).contains(&max_lit),
            "brightest lit floor pixel = {max_lit}"
        );
    }
}
