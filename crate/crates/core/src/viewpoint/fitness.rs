use crate::geom::TriMesh;
use crate::material::MaterialState;
use crate::projection::{
    area_mismatch, camera_frame, rasterize_material_area_exact, rasterize_mesh_area, BinaryImage,
    CameraFrame, Viewpoint, DEFAULT_HALF_EXTENT, DEFAULT_RESOLUTION,
};
use crate::Result;
use std::collections::HashMap;

/// Squared Frobenius norm of the difference between the material and mesh
/// area images under `v`, i.e. the number of differing pixels at 256^2.
pub fn evaluate_fitness(v: &Viewpoint, material: &MaterialState, mesh: &TriMesh) -> Result<f64> {
    let frame = camera_frame(v);
    let b = rasterize_material_area_exact(material, &frame, DEFAULT_RESOLUTION);
    let m = rasterize_mesh_area(mesh, &frame, DEFAULT_RESOLUTION)?;
    Ok(area_mismatch(&b, &m)? as f64)
}

/// Fitness evaluation with the mesh images cached per viewpoint, since the
/// mesh does not change between cuts.
#[derive(Debug, Clone)]
pub struct ViewEvaluator {
    target: TriMesh,
    resolution: usize,
    scale: f64,
    mesh_images: HashMap<(u64, u64), BinaryImage>,
    containment_violations: usize,
}

impl ViewEvaluator {
    /// `target` is everything the cuts must spare (the mesh, plus any fixture).
    pub fn new(target: TriMesh, resolution: usize, scale: f64) -> Self {
        Self {
            target,
            resolution,
            scale,
            mesh_images: HashMap::new(),
            containment_violations: 0,
        }
    }

    pub fn with_defaults(target: TriMesh) -> Self {
        Self::new(target, DEFAULT_RESOLUTION, DEFAULT_HALF_EXTENT)
    }

    pub fn target(&self) -> &TriMesh {
        &self.target
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn frame(&self, v: &Viewpoint) -> CameraFrame {
        CameraFrame::looking_at_origin(v, self.scale)
    }

    pub fn mesh_image(&mut self, v: &Viewpoint) -> Result<&BinaryImage> {
        let key = (v.phi.to_bits(), v.theta.to_bits());
        if !self.mesh_images.contains_key(&key) {
            let img = rasterize_mesh_area(&self.target, &self.frame(v), self.resolution)?;
            self.mesh_images.insert(key, img);
        }
        Ok(&self.mesh_images[&key])
    }

    pub fn material_image(&self, material: &MaterialState, v: &Viewpoint) -> BinaryImage {
        rasterize_material_area_exact(material, &self.frame(v), self.resolution)
    }

    pub fn fitness(&mut self, material: &MaterialState, v: &Viewpoint) -> Result<f64> {
        let b = self.material_image(material, v);
        let m = self.mesh_image(v)?;
        let contained = m.is_subset_of(&b);
        let mismatch = area_mismatch(&b, m)? as f64;
        if !contained {
            self.containment_violations += 1;
            log::warn!("mesh image not contained in material image at {v:?}");
        }
        Ok(mismatch)
    }

    /// Number of evaluations where the mesh image stuck out of the material
    /// image (should stay zero).
    pub fn containment_violations(&self) -> usize {
        self.containment_violations
    }
}
