//! The remnant stock as an implicit solid: the unit box (optionally joined to
//! a workbench cylinder) intersected with every prism cut applied so far.

mod ray;
mod surface;
mod volume;

pub use ray::RayCaster;
pub use surface::extract_surface_mesh;
pub use volume::{estimate_volume, mesh_volume, termination_check};

use crate::geom::{ClosedBSpline2, EdgeGrid, IndexedPolygon, TriMesh, Vec2, Vec3};
use crate::projection::CameraFrame;
use crate::{Error, Result};
use std::sync::Arc;

/// Vertices of the polygon standing in for a cut curve in membership tests.
pub const CUT_POLYGON_SAMPLES: usize = 2048;

/// Half side length of the stock box.
pub const BOX_HALF: f64 = 0.5;

/// Keeps the points whose projection under `frame` lies inside `curve`.
#[derive(Debug, Clone)]
pub struct PrismCut {
    frame: CameraFrame,
    curve: ClosedBSpline2,
    polygon: IndexedPolygon,
}

impl PrismCut {
    pub fn new(frame: CameraFrame, curve: ClosedBSpline2) -> Self {
        let polygon = IndexedPolygon::new(curve.sample(CUT_POLYGON_SAMPLES));
        Self {
            frame,
            curve,
            polygon,
        }
    }

    pub fn frame(&self) -> &CameraFrame {
        &self.frame
    }

    pub fn curve(&self) -> &ClosedBSpline2 {
        &self.curve
    }

    /// The sampled polygon used for membership.
    pub fn polygon(&self) -> &IndexedPolygon {
        &self.polygon
    }

    #[inline]
    pub fn contains(&self, p: &Vec3) -> bool {
        self.polygon.contains(self.frame.project(p))
    }

    /// Checks that the projection of `mesh` lies inside the cut region without
    /// touching its boundary polyline.
    pub fn encloses(&self, mesh: &TriMesh) -> Result<()> {
        let projected: Vec<Vec2> = mesh.vertices.iter().map(|v| self.frame.project(v)).collect();
        if let Some(i) = projected.iter().position(|&q| !self.polygon.contains(q)) {
            return Err(Error::InvalidCut(format!("mesh vertex {i} lies outside the cut curve")));
        }
        let grid = EdgeGrid::from_closed(self.polygon.vertices());
        for t in &mesh.triangles {
            for k in 0..3 {
                let a = projected[t[k] as usize];
                let b = projected[t[(k + 1) % 3] as usize];
                if grid.segment_hits(a, b) {
                    return Err(Error::InvalidCut("mesh edge crosses the cut curve".into()));
                }
            }
        }
        Ok(())
    }
}

/// Vertical cylinder holding the stock from below.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Workbench {
    pub center: (f64, f64),
    pub radius: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl Default for Workbench {
    fn default() -> Self {
        Self {
            center: (0.0, 0.0),
            radius: 0.3,
            z_min: -BOX_HALF - 0.5,
            z_max: -BOX_HALF,
        }
    }
}

impl Workbench {
    pub fn contains(&self, p: &Vec3) -> bool {
        let dx = p.x - self.center.0;
        let dy = p.y - self.center.1;
        p.z >= self.z_min && p.z <= self.z_max && dx * dx + dy * dy <= self.radius * self.radius
    }

    pub fn mesh(&self, segments: usize) -> TriMesh {
        TriMesh::cylinder(self.center, self.radius, self.z_min, self.z_max, segments)
    }
}

/// Immutable remnant solid. Cloning is cheap; cuts are shared.
#[derive(Debug, Clone, Default)]
pub struct MaterialState {
    cuts: Vec<Arc<PrismCut>>,
    workbench: Option<Workbench>,
    bottom_plane: Option<f64>,
}

impl MaterialState {
    /// The untouched unit box.
    pub fn pristine() -> Self {
        Self::default()
    }

    pub fn with_workbench(workbench: Workbench) -> Self {
        Self {
            workbench: Some(workbench),
            ..Self::default()
        }
    }

    pub fn cuts(&self) -> impl ExactSizeIterator<Item = &PrismCut> {
        self.cuts.iter().map(|c| c.as_ref())
    }

    pub fn cut_count(&self) -> usize {
        self.cuts.len() + self.bottom_plane.is_some() as usize
    }

    pub fn workbench(&self) -> Option<&Workbench> {
        self.workbench.as_ref()
    }

    /// Height of the planar cut separating stock from fixture, if applied.
    pub fn bottom_plane(&self) -> Option<f64> {
        self.bottom_plane
    }

    /// Bounds of the region that can hold material.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(-BOX_HALF);
        let hi = Vec3::repeat(BOX_HALF);
        if let (Some(w), None) = (&self.workbench, self.bottom_plane) {
            lo.z = lo.z.min(w.z_min);
        }
        if let Some(z) = self.bottom_plane {
            lo.z = lo.z.max(z);
        }
        (lo, hi)
    }

    #[inline]
    pub fn in_box(p: &Vec3) -> bool {
        p.x.abs() <= BOX_HALF && p.y.abs() <= BOX_HALF && p.z.abs() <= BOX_HALF
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        if !(Self::in_box(p) || self.workbench.is_some_and(|w| w.contains(p))) {
            return false;
        }
        if self.bottom_plane.is_some_and(|z| p.z < z) {
            return false;
        }
        self.cuts.iter().all(|c| c.contains(p))
    }

    /// New state with `cut` applied after checking that it spares `mesh` (and
    /// the workbench, which the wire must not enter either).
    pub fn apply_cut(&self, cut: PrismCut, mesh: &TriMesh) -> Result<Self> {
        cut.encloses(mesh)?;
        if let Some(w) = &self.workbench {
            cut.encloses(&w.mesh(64))
                .map_err(|e| Error::InvalidCut(format!("workbench: {e}")))?;
        }
        Ok(self.apply_cut_unchecked(cut))
    }

    /// New state with `cut` applied, trusting the caller about enclosure.
    pub fn apply_cut_unchecked(&self, cut: PrismCut) -> Self {
        let mut next = self.clone();
        next.cuts.push(Arc::new(cut));
        next
    }

    /// New state with everything below height `z` removed.
    pub fn apply_bottom_plane(&self, z: f64, mesh: &TriMesh) -> Result<Self> {
        if let Some(v) = mesh.vertices.iter().find(|v| v.z < z) {
            return Err(Error::InvalidCut(format!(
                "mesh vertex at z = {} lies below the bottom plane {z}",
                v.z
            )));
        }
        let mut next = self.clone();
        next.bottom_plane = Some(self.bottom_plane.map_or(z, |b| b.max(z)));
        Ok(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::{camera_frame, Viewpoint};
    use std::f64::consts::FRAC_PI_2;

    pub(crate) fn z_circle_cut(radius: f64) -> PrismCut {
        let frame = camera_frame(&Viewpoint::new(FRAC_PI_2, 0.0, 2.0).unwrap());
        PrismCut::new(frame, ClosedBSpline2::circle(Vec2::zeros(), radius, 64).unwrap())
    }

    #[test]
    fn pristine_membership() {
        let m = MaterialState::pristine();
        assert!(m.contains(&Vec3::zeros()));
        assert!(m.contains(&Vec3::new(0.5, 0.5, -0.5)));
        assert!(!m.contains(&Vec3::new(0.6, 0.0, 0.0)));
    }

    #[test]
    fn circular_cut_membership() {
        let m = MaterialState::pristine().apply_cut_unchecked(z_circle_cut(0.25));
        assert!(!m.contains(&Vec3::new(0.3, 0.0, 0.0)));
        assert!(m.contains(&Vec3::new(0.1, 0.0, 0.0)));
        assert!(m.contains(&Vec3::new(0.0, 0.24, 0.45)));
    }

    #[test]
    fn cut_is_idempotent() {
        let cut = z_circle_cut(0.3);
        let once = MaterialState::pristine().apply_cut_unchecked(cut.clone());
        let twice = once.apply_cut_unchecked(cut);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        use rand::{Rng, SeedableRng};
        for _ in 0..2000 {
            let p = Vec3::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6));
            assert_eq!(once.contains(&p), twice.contains(&p));
        }
    }

    #[test]
    fn enclosure_is_enforced() {
        let inside = TriMesh::icosphere(0.2, 1);
        let outside = TriMesh::icosphere(0.3, 1);
        let m = MaterialState::pristine();
        assert!(m.apply_cut(z_circle_cut(0.25), &inside).is_ok());
        assert!(matches!(
            m.apply_cut(z_circle_cut(0.25), &outside),
            Err(Error::InvalidCut(_))
        ));
    }

    #[test]
    fn workbench_and_bottom_plane() {
        let m = MaterialState::with_workbench(Workbench::default());
        let below = Vec3::new(0.0, 0.0, -0.8);
        assert!(m.contains(&below));
        assert!(!m.contains(&Vec3::new(0.4, 0.0, -0.8)));
        let mesh = TriMesh::icosphere(0.3, 1);
        let cut = m.apply_bottom_plane(-0.5, &mesh).unwrap();
        assert!(!cut.contains(&below));
        assert!(cut.contains(&Vec3::new(0.0, 0.0, -0.5)));
        assert!(m.apply_bottom_plane(0.0, &mesh).is_err());
    }
}
