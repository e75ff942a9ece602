use crate::geom::{Vec2, Vec3};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Half-extent of the image plane covering the unit stock box in any
/// orientation, with a 10% margin.
pub const DEFAULT_HALF_EXTENT: f64 = 1.1 * 0.866_025_403_784_438_6;

/// Elevation / azimuth / radius on the view sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viewpoint {
    pub phi: f64,
    pub theta: f64,
    pub r: f64,
}

impl Viewpoint {
    pub fn new(phi: f64, theta: f64, r: f64) -> Result<Self> {
        use std::f64::consts::{FRAC_PI_2, TAU};
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidArgument(format!("view radius {r} must be positive")));
        }
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&phi) {
            return Err(Error::InvalidArgument(format!("elevation {phi} out of range")));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidArgument("non-finite azimuth".into()));
        }
        Ok(Self {
            phi,
            theta: theta.rem_euclid(TAU),
            r,
        })
    }

    /// Viewpoint on the sphere of radius `r` in direction `dir`.
    pub fn from_direction(dir: Vec3, r: f64) -> Self {
        let d = dir.normalize();
        let phi = d.z.clamp(-1.0, 1.0).asin();
        let theta = d.y.atan2(d.x).rem_euclid(std::f64::consts::TAU);
        Self { phi, theta, r }
    }

    /// Unit vector from the origin to the camera.
    pub fn direction(&self) -> Vec3 {
        let (sp, cp) = self.phi.sin_cos();
        let (st, ct) = self.theta.sin_cos();
        Vec3::new(cp * ct, cp * st, sp)
    }

    pub fn position(&self) -> Vec3 {
        self.direction() * self.r
    }
}

/// Orthonormal orthographic camera: `{right, up, -view_dir}` is right-handed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraFrame {
    pub position: Vec3,
    pub view_dir: Vec3,
    pub right: Vec3,
    pub up: Vec3,
    /// World units per image half-extent.
    pub scale: f64,
}

/// Camera for `v` looking at the origin, covering the unit box.
pub fn camera_frame(v: &Viewpoint) -> CameraFrame {
    CameraFrame::looking_at_origin(v, DEFAULT_HALF_EXTENT)
}

impl CameraFrame {
    pub fn looking_at_origin(v: &Viewpoint, scale: f64) -> Self {
        let position = v.position();
        let view_dir = -v.direction();
        let reference = if v.phi.abs() > 80f64.to_radians() {
            Vec3::x()
        } else {
            Vec3::z()
        };
        let up = (reference - view_dir * reference.dot(&view_dir)).normalize();
        let right = view_dir.cross(&up);
        Self {
            position,
            view_dir,
            right,
            up,
            scale,
        }
    }

    /// Image-plane coordinates of a world point (plane through the origin).
    #[inline]
    pub fn project(&self, p: &Vec3) -> Vec2 {
        Vec2::new(p.dot(&self.right), p.dot(&self.up))
    }

    /// World point on the plane through the origin for image-plane coordinates.
    #[inline]
    pub fn lift(&self, q: Vec2) -> Vec3 {
        self.right * q.x + self.up * q.y
    }

    /// Continuous pixel coordinates of an image-plane point; pixel `(i, j)`
    /// covers `[i, i+1] x [j, j+1]`.
    #[inline]
    pub fn to_pixel(&self, q: Vec2, resolution: usize) -> Vec2 {
        let k = resolution as f64 * 0.5;
        Vec2::new((q.x / self.scale + 1.0) * k, (q.y / self.scale + 1.0) * k)
    }

    /// Image-plane point for continuous pixel coordinates.
    #[inline]
    pub fn from_pixel(&self, p: Vec2, resolution: usize) -> Vec2 {
        let k = 2.0 / resolution as f64;
        Vec2::new((p.x * k - 1.0) * self.scale, (p.y * k - 1.0) * self.scale)
    }

    /// World-space width of one pixel.
    pub fn pixel_size(&self, resolution: usize) -> f64 {
        2.0 * self.scale / resolution as f64
    }
}
