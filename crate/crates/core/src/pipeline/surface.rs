use super::Similarity;
use crate::geom::{ClosedBSpline2, TriMesh, Vec3};
use crate::projection::CameraFrame;

/// Distance the ruled surface reaches on each side of the image plane.
pub const EXTRUSION_HALF_LENGTH: f64 = 1.0;

/// Ruled surface `s(u, v) = (1 - v) c0(u) + v c1(u)` swept by the wire, where
/// `c0` and `c1` are copies of the fitted curve shifted along the view axis.
#[derive(Debug, Clone, PartialEq)]
pub struct RuledSurface {
    curve: ClosedBSpline2,
    frame: CameraFrame,
    half_length: f64,
}

/// Lifts `curve` from the image plane of `frame` into world space and extrudes
/// it along the view direction.
pub fn extrude_ruled_surface(curve: &ClosedBSpline2, frame: &CameraFrame) -> RuledSurface {
    RuledSurface {
        curve: curve.clone(),
        frame: *frame,
        half_length: EXTRUSION_HALF_LENGTH,
    }
}

impl RuledSurface {
    pub fn curve(&self) -> &ClosedBSpline2 {
        &self.curve
    }

    pub fn frame(&self) -> &CameraFrame {
        &self.frame
    }

    /// Curve on the plane through the origin orthogonal to the view axis.
    pub fn base(&self, u: f64) -> Vec3 {
        self.frame.lift(self.curve.point(u))
    }

    /// Boundary curve nearest the camera.
    pub fn c0(&self, u: f64) -> Vec3 {
        self.base(u) - self.frame.view_dir * self.half_length
    }

    pub fn c1(&self, u: f64) -> Vec3 {
        self.base(u) + self.frame.view_dir * self.half_length
    }

    pub fn point(&self, u: f64, v: f64) -> Vec3 {
        self.c0(u) * (1.0 - v) + self.c1(u) * v
    }

    /// Quad-strip triangulation with `nu` samples around and 2 along.
    pub fn to_mesh(&self, nu: usize) -> TriMesh {
        let nu = nu.max(3);
        let mut vertices = Vec::with_capacity(2 * nu);
        for i in 0..nu {
            let u = i as f64 / nu as f64;
            vertices.push(self.c0(u));
            vertices.push(self.c1(u));
        }
        let mut triangles = Vec::with_capacity(2 * nu);
        for i in 0..nu as u32 {
            let j = (i + 1) % nu as u32;
            let (a, b, c, d) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
            triangles.push([a, c, d]);
            triangles.push([a, d, b]);
        }
        TriMesh {
            vertices,
            triangles,
        }
    }

    /// [`RuledSurface::to_mesh`] mapped by `t`.
    pub fn to_mesh_with(&self, nu: usize, t: &Similarity) -> TriMesh {
        t.transform_mesh(&self.to_mesh(nu))
    }
}
