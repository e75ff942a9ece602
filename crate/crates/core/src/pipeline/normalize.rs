use crate::geom::{TriMesh, Vec3};
use crate::material::BOX_HALF;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Free space left between the normalized mesh and each box face, as a
/// fraction of the box side.
pub const MARGIN: f64 = 0.02;

/// Uniform scale followed by a translation: `p -> scale * p + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub scale: f64,
    pub offset: Vec3,
}

impl Similarity {
    pub fn identity() -> Self {
        Self {
            scale: 1.0,
            offset: Vec3::zeros(),
        }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        p * self.scale + self.offset
    }

    pub fn invert(&self, p: &Vec3) -> Vec3 {
        (p - self.offset) / self.scale
    }

    pub fn inverse(&self) -> Self {
        Self {
            scale: 1.0 / self.scale,
            offset: -self.offset / self.scale,
        }
    }

    /// Homogeneous 4x4 matrix, row-major.
    pub fn matrix(&self) -> [[f64; 4]; 4] {
        let (s, t) = (self.scale, self.offset);
        [
            [s, 0.0, 0.0, t.x],
            [0.0, s, 0.0, t.y],
            [0.0, 0.0, s, t.z],
            [0.0, 0.0, 0.0, 1.0],
        ]
    }

    /// Reads back a matrix produced by [`Similarity::matrix`].
    pub fn from_matrix(m: &[[f64; 4]; 4]) -> Result<Self> {
        let s = m[0][0];
        let off_diagonal = [m[0][1], m[0][2], m[1][0], m[1][2], m[2][0], m[2][1], m[3][0], m[3][1], m[3][2]];
        if !(s > 0.0) || m[1][1] != s || m[2][2] != s || m[3][3] != 1.0 || off_diagonal.iter().any(|&v| v != 0.0) {
            return Err(Error::InvalidArgument("transform is not a uniform scale plus translation".into()));
        }
        Ok(Self {
            scale: s,
            offset: Vec3::new(m[0][3], m[1][3], m[2][3]),
        })
    }

    pub fn transform_mesh(&self, mesh: &TriMesh) -> TriMesh {
        mesh.transformed(self.scale, self.offset)
    }
}

/// Scales and centers `mesh` into the unit box, leaving [`MARGIN`] on every
/// side along its longest axis.
pub fn normalize_input(mesh: &TriMesh) -> Result<(TriMesh, Similarity)> {
    if mesh.triangles.is_empty() {
        return Err(Error::Empty("mesh has no triangles"));
    }
    if mesh.vertices.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
        return Err(Error::InvalidArgument("non-finite mesh vertex".into()));
    }
    let (lo, hi) = mesh.bbox();
    let extent = (hi - lo).max();
    if !(extent > 1e-12 * lo.abs().max().max(hi.abs().max()).max(1.0)) {
        return Err(Error::InvalidArgument("mesh has zero extent".into()));
    }
    let scale = 2.0 * BOX_HALF * (1.0 - 2.0 * MARGIN) / extent;
    let offset = -(lo + hi) * 0.5 * scale;
    let t = Similarity { scale, offset };
    Ok((t.transform_mesh(mesh), t))
}
