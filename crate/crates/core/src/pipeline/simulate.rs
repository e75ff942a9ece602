use super::{mesh_digest, CutPlan};
use crate::geom::{MeshDistance, TriMesh};
use crate::material::{estimate_volume, extract_surface_mesh};
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Surface samples used for the remnant-to-mesh distance.
pub const DISTANCE_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    /// Cuts applied so far, the planar one included.
    pub cuts: usize,
    pub volume: f64,
    pub volume_stderr: f64,
    /// Volume recorded in the plan for this step, when there is one.
    pub recorded_volume: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub grid_resolution: usize,
    pub mesh_volume: f64,
    /// One entry per replayed cut.
    pub steps: Vec<StepReport>,
    /// Mean distance from remnant surface samples to the mesh.
    pub d_result_avg: f64,
    pub final_volume: f64,
    /// Largest deviation between replayed and recorded volumes, in combined
    /// standard errors.
    pub max_volume_z: f64,
}

/// Replays `plan` on pristine stock and meshes the remnant. `mesh` is the
/// input mesh the plan was made for, in its own units; the remnant comes back
/// in normalized units.
pub fn simulate(plan: &CutPlan, mesh: &TriMesh, grid_resolution: usize) -> Result<(TriMesh, SimulationReport)> {
    if mesh_digest(mesh) != plan.mesh.sha256 {
        return Err(Error::PlanMismatch(format!(
            "mesh digest {} differs from the plan's {}",
            mesh_digest(mesh),
            plan.mesh.sha256
        )));
    }
    let normalized = plan.similarity()?.transform_mesh(mesh);
    let samples = plan.config.volume_samples;

    let mut material = plan.initial_material();
    let mut steps = Vec::new();
    let mut max_z: f64 = 0.0;
    let mut last_volume = estimate_volume(&material, samples, plan.config.seed)?.0;
    for (k, cut) in plan.cuts.iter().enumerate() {
        material = material.apply_cut_unchecked(cut.prism()?);
        let (v, se) = estimate_volume(&material, samples, cut.volume_seed)?;
        let recorded = cut.metrics.volume;
        let sigma = (se * se + cut.metrics.volume_stderr.powi(2)).sqrt();
        if sigma > 0.0 {
            max_z = max_z.max((v - recorded).abs() / sigma);
        } else if v != recorded {
            max_z = f64::INFINITY;
        }
        steps.push(StepReport {
            cuts: k + 1,
            volume: v,
            volume_stderr: se,
            recorded_volume: Some(recorded),
        });
        last_volume = v;
    }
    if let Some(z) = plan.bottom_plane {
        material = material.apply_bottom_plane(z, &normalized)?;
        let (v, se) = estimate_volume(&material, samples, plan.config.seed)?;
        steps.push(StepReport {
            cuts: plan.cuts.len() + 1,
            volume: v,
            volume_stderr: se,
            recorded_volume: None,
        });
        last_volume = v;
    }
    let surface = extract_surface_mesh(&material, grid_resolution)?;
    let d_result_avg = mean_distance(&surface, &MeshDistance::new(&normalized), plan.config.seed)?;
    let report = SimulationReport {
        grid_resolution,
        mesh_volume: plan.mesh.volume,
        steps,
        d_result_avg,
        final_volume: last_volume,
        max_volume_z: max_z,
    };
    Ok((surface, report))
}

fn mean_distance(surface: &TriMesh, distance: &MeshDistance, seed: u64) -> Result<f64> {
    if surface.triangles.is_empty() {
        return Err(Error::Empty("remnant surface"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = surface.sample_surface(DISTANCE_SAMPLES, &mut rng);
    Ok(pts.iter().map(|p| distance.distance(*p)).sum::<f64>() / pts.len() as f64)
}
