//! Minimal 3D vector and ray/rectangle intersection primitives.
//!
//! World frame: x points right as seen from the camera, y points up, z runs
//! from the wall toward the camera. The wall lives in the plane z = 0, the
//! ground is the plane y = 0.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        debug_assert!(n > 0.0, "normalizing zero vector");
        self * (1.0 / n)
    }

    /// Mirror reflection of a propagation direction about a unit normal.
    pub fn reflect(self, normal: Vec3) -> Vec3 {
        self - normal * (2.0 * self.dot(normal))
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit direction.
    pub dir: Vec3,
}

impl Ray {
    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.dir * t
    }
}

/// Offset below which an intersection parameter counts as self-intersection.
pub const T_EPS: f64 = 1e-9;

/// Axis-aligned rectangle in a constant-z plane, spanning
/// x ∈ [-half_width, half_width], y ∈ [0, height]. Used for both the wall
/// and the jacket; both are treated as double-sided.
#[derive(Debug, Clone, Copy)]
pub struct ZRect {
    pub z: f64,
    pub half_width: f64,
    pub height: f64,
}

impl ZRect {
    /// Ray parameter of the first hit, if any.
    pub fn hit(&self, ray: &Ray) -> Option<f64> {
        if ray.dir.z == 0.0 {
            return None;
        }
        let t = (self.z - ray.origin.z) / ray.dir.z;
        if t <= T_EPS {
            return None;
        }
        let p = ray.at(t);
        if p.x.abs() <= self.half_width && p.y >= 0.0 && p.y <= self.height {
            Some(t)
        } else {
            None
        }
    }

    /// True when the open segment from `a` to `b` crosses the rectangle.
    pub fn blocks_segment(&self, a: Vec3, b: Vec3) -> bool {
        let dz = b.z - a.z;
        if dz == 0.0 {
            return false;
        }
        let t = (self.z - a.z) / dz;
        if t <= T_EPS || t >= 1.0 - T_EPS {
            return false;
        }
        let x = a.x + (b.x - a.x) * t;
        let y = a.y + (b.y - a.y) * t;
        x.abs() <= self.half_width && (0.0..=self.height).contains(&y)
    }
}

/// Ray parameter of the first hit with the ground plane y = 0.
pub fn hit_ground(ray: &Ray) -> Option<f64> {
    if ray.dir.y == 0.0 {
        return None;
    }
    let t = -ray.origin.y / ray.dir.y;
    if t > T_EPS {
        Some(t)
    } else {
        None
    }
}
