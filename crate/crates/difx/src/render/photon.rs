//! Photon tracing and irradiance gathering.
//!
//! Photons are emitted from the point light only into the solid angle
//! subtended by the jacket (power scaled by the cone's share of the full
//! sphere), mirror-reflected once about the bump-perturbed normal, and
//! deposited where they next hit the ground or the wall. Direct light never
//! enters the map — it is computed analytically at shading time — so the map
//! carries exactly the jacket-scattered signal.
//!
//! Tracing runs in fixed-size batches; batch `b` draws from a ChaCha8 stream
//! seeded with `seed ^ b`, and batches are concatenated in index order, so
//! the deposit list is identical for any worker count.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::render::bump::build_bump_field;
use crate::render::geom::{hit_ground, Ray, Vec3, ZRect};
use crate::render::kdtree::KdTree3;
use crate::scene::{SceneConfig, JACKET_MAX_HEIGHT_M, JACKET_MAX_WIDTH_M};

/// Gather radius floor: caps the density estimate when the k-th neighbor is
/// degenerately close.
pub const MIN_GATHER_RADIUS_M: f64 = 0.01;

/// One photon landing: where it hit, what it carried, where it was going.
#[derive(Debug, Clone, Copy)]
pub struct Deposit {
    pub position: Vec3,
    /// Per-channel power, already attenuated by the jacket color.
    pub power: [f64; 3],
    /// Unit propagation direction at the deposit point.
    pub incident_dir: Vec3,
}

/// Spatial index of jacket-scattered photon deposits.
#[derive(Debug, Clone)]
pub struct PhotonMap {
    deposits: Vec<Deposit>,
    tree: KdTree3,
    /// Power emitted into the bounding cone, per channel (the light is white).
    emitted_per_channel: f64,
}

impl PhotonMap {
    pub fn empty() -> Self {
        Self {
            deposits: Vec::new(),
            tree: KdTree3::build(Vec::new()),
            emitted_per_channel: 0.0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.deposits.is_empty()
    }

    pub fn len(&self) -> usize {
        self.deposits.len()
    }

    pub fn deposits(&self) -> &[Deposit] {
        &self.deposits
    }

    pub fn emitted_per_channel(&self) -> f64 {
        self.emitted_per_channel
    }

    /// Total deposited power per channel.
    pub fn deposited_per_channel(&self) -> [f64; 3] {
        let mut total = [0.0; 3];
        for d in &self.deposits {
            for (t, p) in total.iter_mut().zip(&d.power) {
                *t += p;
            }
        }
        total
    }
}

/// Emission cone: the bounding cone of the *largest legal* jacket rectangle
/// in the jacket's plane, as seen from the light. Using the maximal
/// rectangle instead of the actual one keeps every photon's target point
/// fixed while the jacket dimensions sweep, so a bigger jacket strictly adds
/// deposits without disturbing existing ones; photons that miss the actual
/// jacket are discarded, and per-photon power carries the cone's solid-angle
/// fraction, so the received power is unchanged either way.
fn jacket_bounding_cone(light: Vec3, jacket_plane_z: f64) -> (Vec3, f64) {
    let jacket = ZRect {
        z: jacket_plane_z,
        half_width: JACKET_MAX_WIDTH_M / 2.0,
        height: JACKET_MAX_HEIGHT_M,
    };
    let jacket = &jacket;
    let center = Vec3::new(0.0, jacket.height / 2.0, jacket.z);
    let axis = (center - light).normalized();
    let mut cos_min = 1.0f64;
    let mut take = |x: f64, y: f64| {
        let d = (Vec3::new(x, y, jacket.z) - light).normalized();
        cos_min = cos_min.min(axis.dot(d));
    };
    // Sample the rectangle boundary; the extreme direction lies on it.
    let steps = 8;
    for i in 0..=steps {
        let f = i as f64 / steps as f64;
        let x = jacket.half_width * (2.0 * f - 1.0);
        take(x, 0.0);
        take(x, jacket.height);
        let y = jacket.height * f;
        take(-jacket.half_width, y);
        take(jacket.half_width, y);
    }
    let half_angle = cos_min.clamp(-1.0, 1.0).acos();
    let padded = (half_angle * 1.02 + 1e-4).min(PI);
    (axis, padded.cos())
}

/// Orthonormal basis completing a unit axis.
fn frame(axis: Vec3) -> (Vec3, Vec3) {
    let helper = if axis.x.abs() < 0.9 {
        Vec3::new(1.0, 0.0, 0.0)
    } else {
        Vec3::new(0.0, 1.0, 0.0)
    };
    let e1 = axis.cross(helper).normalized();
    let e2 = axis.cross(e1);
    (e1, e2)
}

/// Traces `scene.render.photon_count` photons toward the jacket and returns
/// the deposit map. Absent photographer or a zero-area jacket yields an
/// empty map. Deterministic in `seed` and independent of thread count.
pub fn trace_photons(scene: &SceneConfig, present: bool, seed: u64) -> PhotonMap {
    let jacket_cfg = &scene.jacket;
    if !present
        || jacket_cfg.width_m <= 0.0
        || jacket_cfg.height_m <= 0.0
        || scene.render.photon_count == 0
    {
        return PhotonMap::empty();
    }

    let light = Vec3::new(0.0, scene.light_height_m, -scene.light_behind_wall_m);
    let wall = ZRect {
        z: 0.0,
        half_width: scene.wall_width_m / 2.0,
        height: scene.wall_height_m,
    };
    let jacket = ZRect {
        z: scene.camera_wall_distance_m + jacket_cfg.offset_behind_camera_m,
        half_width: jacket_cfg.width_m / 2.0,
        height: jacket_cfg.height_m,
    };
    let field = build_bump_field(jacket_cfg, seed);

    let (axis, cos_half) = jacket_bounding_cone(light, jacket.z);
    let (e1, e2) = frame(axis);
    let solid_angle = 2.0 * PI * (1.0 - cos_half);
    let n_photons = scene.render.photon_count;
    let photon_power = scene.light_power * solid_angle / n_photons as f64;
    let color = jacket_cfg.color.channels();

    let batch_size = scene.render.batch_size.max(1);
    let n_batches = n_photons.div_ceil(batch_size);

    let deposits: Vec<Deposit> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ b);
            let count = batch_size.min(n_photons - b * batch_size);
            let mut batch = Vec::new();
            for _ in 0..count {
                let z = 1.0 - rng.random::<f64>() * (1.0 - cos_half);
                let phi = 2.0 * PI * rng.random::<f64>();
                let sin_t = (1.0 - z * z).max(0.0).sqrt();
                let dir = e1 * (sin_t * phi.cos()) + e2 * (sin_t * phi.sin()) + axis * z;
                let ray = Ray { origin: light, dir };

                // The photon must reach the jacket before anything else.
                let t_jacket = match jacket.hit(&ray) {
                    Some(t) => t,
                    None => continue,
                };
                if wall.hit(&ray).is_some_and(|t| t < t_jacket) {
                    continue; // absorbed by the black wall
                }
                if hit_ground(&ray).is_some_and(|t| t < t_jacket) {
                    continue;
                }

                let p = ray.at(t_jacket);
                let normal = field.perturbed_normal(p.x, p.y);
                let reflected = dir.reflect(normal);
                let bounce = Ray {
                    origin: p,
                    dir: reflected,
                };

                // Deposit at the next diffuse/absorbing surface.
                let t_wall = wall.hit(&bounce);
                let t_floor = hit_ground(&bounce);
                let t_hit = match (t_wall, t_floor) {
                    (Some(a), Some(b)) => a.min(b),
                    (Some(a), None) => a,
                    (None, Some(b)) => b,
                    (None, None) => continue, // escaped the scene
                };
                batch.push(Deposit {
                    position: bounce.at(t_hit),
                    power: [
                        photon_power * color[0],
                        photon_power * color[1],
                        photon_power * color[2],
                    ],
                    incident_dir: reflected,
                });
            }
            batch
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();

    let tree = KdTree3::build(
        deposits
            .iter()
            .map(|d| [d.position.x, d.position.y, d.position.z])
            .collect(),
    );
    PhotonMap {
        deposits,
        tree,
        emitted_per_channel: scene.light_power * solid_angle,
    }
}

/// k-nearest-neighbor irradiance estimate at a surface point: the summed
/// power of the k nearest front-facing deposits over the disk π·r_k², with
/// r_k floored at [`MIN_GATHER_RADIUS_M`]. An empty map contributes nothing.
pub fn gather_irradiance(map: &PhotonMap, point: Vec3, normal: Vec3, k: usize) -> [f64; 3] {
    if map.is_empty() || k == 0 {
        return [0.0; 3];
    }
    let neighbors = map.tree.nearest_k([point.x, point.y, point.z], k);
    let r2 = neighbors
        .last()
        .map(|&(_, d2)| d2)
        .unwrap_or(0.0)
        .max(MIN_GATHER_RADIUS_M * MIN_GATHER_RADIUS_M);
    let mut sum = [0.0; 3];
    for &(id, _) in &neighbors {
        let d = &map.deposits[id as usize];
        if d.incident_dir.dot(normal) < 0.0 {
            for (s, p) in sum.iter_mut().zip(&d.power) {
                *s += p;
            }
        }
    }
    let inv_area = 1.0 / (PI * r2);
    [sum[0] * inv_area, sum[1] * inv_area, sum[2] * inv_area]
}
