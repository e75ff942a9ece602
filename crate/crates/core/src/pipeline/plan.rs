use super::{extrude_ruled_surface, normalize_input, RuledSurface, Similarity};
use crate::fit::{fit, FitConfig, TraceRow};
use crate::geom::{ClosedBSpline2, Polygon2, TriMesh, Vec2, Vec3};
use crate::material::{estimate_volume, mesh_volume, MaterialState, PrismCut, Workbench, BOX_HALF};
use crate::projection::{extract_outer_contour, rasterize_mesh_conservative, CameraFrame, Viewpoint};
use crate::viewpoint::{fibonacci_sample, run_ga, GaConfig, ViewEvaluator};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const PLAN_VERSION: u32 = 1;

/// Image margin around everything a view must show.
const IMAGE_MARGIN: f64 = 1.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlanConfig {
    /// Stop once the remnant exceeds the mesh volume by less than this.
    pub alpha: f64,
    pub max_cuts: usize,
    pub seed: u64,
    /// Side length of the area images in pixels.
    pub resolution: usize,
    /// Contours are traced on images this many times finer than `resolution`.
    pub contour_supersample: usize,
    /// Size of the Fibonacci candidate lattice.
    pub candidates: usize,
    pub view_radius: f64,
    /// Restrict views to the upper hemisphere.
    pub hemisphere: bool,
    /// Monte-Carlo samples per volume estimate.
    pub volume_samples: usize,
    /// Consecutive viewpoint failures tolerated before aborting.
    pub max_failures: usize,
    pub ga: GaConfig,
    pub fit: FitConfig,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            alpha: 0.025,
            max_cuts: 15,
            seed: 0,
            resolution: 256,
            contour_supersample: 4,
            candidates: 200,
            view_radius: 2.0,
            hemisphere: false,
            volume_samples: 200_000,
            max_failures: 3,
            ga: GaConfig::desk(),
            fit: FitConfig::default(),
        }
    }
}

impl PlanConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("plan config: {what}")));
        if !(self.alpha >= 0.0) {
            return bad("alpha must be non-negative");
        }
        if self.resolution < 16 || self.candidates < 2 || self.contour_supersample == 0 {
            return bad("resolution or candidate count too small");
        }
        if !(self.view_radius > 0.0) {
            return bad("view radius must be positive");
        }
        if self.max_failures == 0 {
            return bad("max_failures must be at least 1");
        }
        self.ga.validate()?;
        self.fit.validate()
    }
}

/// Fixture handling for physical cutting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FabricationOptions {
    /// Cylinder the stock is glued to; the wire must avoid it.
    pub workbench: Option<Workbench>,
    /// Height of the final planar cut separating the part from the fixture.
    pub bottom_plane: Option<f64>,
}

impl FabricationOptions {
    /// Default workbench below the box and a bottom cut along the box floor.
    pub fn desk() -> Self {
        Self {
            workbench: Some(Workbench::default()),
            bottom_plane: Some(-BOX_HALF),
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.workbench.is_some() || self.bottom_plane.is_some()
    }

    fn validate(&self) -> Result<()> {
        if let Some(z) = self.bottom_plane {
            if z != -BOX_HALF {
                return Err(Error::InvalidArgument(format!(
                    "bottom plane {z} does not coincide with the box floor"
                )));
            }
        }
        if let Some(w) = self.workbench {
            if !(w.radius > 0.0 && w.z_min < w.z_max) {
                return Err(Error::InvalidArgument("degenerate workbench".into()));
            }
        }
        Ok(())
    }
}

/// Why planning stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The remnant is within `alpha` of the mesh volume.
    Alpha,
    /// `max_cuts` cuts were made.
    MaxIters,
    /// No candidate view shows any removable area.
    Exhausted,
}

/// Serialized form of a closed B-spline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveData {
    pub degree: usize,
    pub knots: Vec<f64>,
    pub control_points: Vec<[f64; 2]>,
}

impl From<&ClosedBSpline2> for CurveData {
    fn from(c: &ClosedBSpline2) -> Self {
        Self {
            degree: c.degree(),
            knots: c.knots().to_vec(),
            control_points: c.control_points().iter().map(|p| [p.x, p.y]).collect(),
        }
    }
}

impl CurveData {
    pub fn to_curve(&self) -> Result<ClosedBSpline2> {
        ClosedBSpline2::new(
            self.degree,
            self.knots.clone(),
            self.control_points.iter().map(|p| Vec2::new(p[0], p[1])).collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutMetrics {
    /// Area mismatch of the chosen view before the cut, in pixels.
    pub fitness_px2: f64,
    pub d_avg: f64,
    /// Remnant volume after the cut.
    pub volume: f64,
    pub volume_stderr: f64,
    pub ga_evaluations: usize,
    pub fit_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutRecord {
    pub phi: f64,
    pub theta: f64,
    pub r: f64,
    pub frame: CameraFrame,
    pub curve: CurveData,
    pub metrics: CutMetrics,
    /// Outer contour the curve was fitted to, in image-plane coordinates.
    pub contour: Vec<[f64; 2]>,
    pub ga_seed: u64,
    pub volume_seed: u64,
}

impl CutRecord {
    pub fn viewpoint(&self) -> Viewpoint {
        Viewpoint {
            phi: self.phi,
            theta: self.theta,
            r: self.r,
        }
    }

    pub fn prism(&self) -> Result<PrismCut> {
        Ok(PrismCut::new(self.frame, self.curve.to_curve()?))
    }

    pub fn ruled_surface(&self) -> Result<RuledSurface> {
        Ok(extrude_ruled_surface(&self.curve.to_curve()?, &self.frame))
    }

    pub fn contour_polygon(&self) -> Result<Polygon2> {
        Polygon2::new(self.contour.iter().map(|p| Vec2::new(p[0], p[1])).collect())
    }
}

/// Identifies the input mesh a plan was made for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshInfo {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub path: Option<String>,
    pub sha256: String,
    pub vertices: usize,
    pub triangles: usize,
    /// Volume of the normalized mesh.
    pub volume: f64,
}

/// Everything needed to replay a planning run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutPlan {
    pub version: u32,
    pub config: PlanConfig,
    pub fabrication: FabricationOptions,
    /// Maps input mesh coordinates to normalized coordinates, row-major.
    pub transform: [[f64; 4]; 4],
    pub mesh: MeshInfo,
    pub cuts: Vec<CutRecord>,
    /// Height of the final planar cut, when one was made.
    pub bottom_plane: Option<f64>,
    pub termination: Termination,
}

impl CutPlan {
    pub fn similarity(&self) -> Result<Similarity> {
        Similarity::from_matrix(&self.transform)
    }

    /// Prism cuts plus the planar one.
    pub fn cut_count(&self) -> usize {
        self.cuts.len() + self.bottom_plane.is_some() as usize
    }

    /// Pristine stock for this plan, fixture included.
    pub fn initial_material(&self) -> MaterialState {
        initial_material(&self.fabrication)
    }
}

/// Per-cut diagnostics not stored in the plan.
#[derive(Debug, Clone, PartialEq)]
pub struct CutTrace {
    pub fit: Vec<TraceRow>,
    pub ga_best: Vec<f64>,
}

/// SHA-256 over vertex coordinates and triangle indices (little endian).
pub fn mesh_digest(mesh: &TriMesh) -> String {
    let mut h = Sha256::new();
    h.update((mesh.vertices.len() as u64).to_le_bytes());
    for v in &mesh.vertices {
        for c in v.iter() {
            h.update(c.to_le_bytes());
        }
    }
    h.update((mesh.triangles.len() as u64).to_le_bytes());
    for t in &mesh.triangles {
        for i in t {
            h.update(i.to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Derives an independent seed for stream `k` of `seed`.
pub fn derive_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed ^ k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn initial_material(fab: &FabricationOptions) -> MaterialState {
    match fab.workbench {
        Some(w) => MaterialState::with_workbench(w),
        None => MaterialState::pristine(),
    }
}

/// Half-extent of an image plane that shows all of `material` from any side.
pub fn image_half_extent(material: &MaterialState) -> f64 {
    let (lo, hi) = material.bounds();
    let corner = Vec3::new(
        lo.x.abs().max(hi.x.abs()),
        lo.y.abs().max(hi.y.abs()),
        lo.z.abs().max(hi.z.abs()),
    );
    IMAGE_MARGIN * corner.norm()
}

/// Fits, extrudes and applies one cut for view `v`.
struct CutAttempt {
    frame: CameraFrame,
    contour: Polygon2,
    curve: ClosedBSpline2,
    d_avg: f64,
    iterations: usize,
    trace: Vec<TraceRow>,
    material: MaterialState,
}

fn attempt_cut(
    v: &Viewpoint,
    evaluator: &ViewEvaluator,
    material: &MaterialState,
    mesh: &TriMesh,
    cfg: &PlanConfig,
) -> Result<CutAttempt> {
    let frame = evaluator.frame(v);
    let res = cfg.resolution * cfg.contour_supersample;
    let image = rasterize_mesh_conservative(evaluator.target(), &frame, res)?;
    let contour = extract_outer_contour(&image, &frame)?;
    let result = fit(&contour, &cfg.fit)?;
    let cut = PrismCut::new(frame, result.curve.clone());
    let material = material.apply_cut(cut, mesh)?;
    Ok(CutAttempt {
        frame,
        contour,
        curve: result.curve,
        d_avg: result.d_avg,
        iterations: result.iterations,
        trace: result.trace,
        material,
    })
}

/// Plans cuts for `mesh` given in its own units.
pub fn plan(mesh: &TriMesh, cfg: &PlanConfig, fab: &FabricationOptions) -> Result<CutPlan> {
    plan_traced(mesh, cfg, fab).map(|(p, _)| p)
}

/// [`plan`] also returning per-cut diagnostics.
pub fn plan_traced(
    mesh: &TriMesh,
    cfg: &PlanConfig,
    fab: &FabricationOptions,
) -> Result<(CutPlan, Vec<CutTrace>)> {
    cfg.validate()?;
    fab.validate()?;
    let (normalized, transform) = normalize_input(mesh)?;
    let mesh_vol = mesh_volume(&normalized);
    let mut material = initial_material(fab);

    let mut target = normalized.clone();
    if let Some(w) = &fab.workbench {
        target.append(&w.mesh(64));
    }
    let mut evaluator = ViewEvaluator::new(target, cfg.resolution, image_half_extent(&material));
    let mut candidates = fibonacci_sample(cfg.candidates, cfg.view_radius)?;
    if cfg.hemisphere {
        candidates = candidates.upper_hemisphere()?;
    }

    let mut cuts = Vec::new();
    let mut traces = Vec::new();
    let mut attempt: u64 = 0;
    let mut failures = 0;
    let mut volume = 1.0;
    let termination = loop {
        if volume - mesh_vol < cfg.alpha {
            break Termination::Alpha;
        }
        if cuts.len() >= cfg.max_cuts {
            break Termination::MaxIters;
        }
        let ga_seed = derive_seed(cfg.seed, 2 * attempt);
        let volume_seed = derive_seed(cfg.seed, 2 * attempt + 1);
        attempt += 1;
        let ga_cfg = GaConfig {
            seed: ga_seed,
            ..cfg.ga.clone()
        };
        let outcome = run_ga(&material, &mut evaluator, &candidates, &ga_cfg)?;
        if outcome.fitness <= 0.0 {
            break Termination::Exhausted;
        }
        let v = outcome.viewpoint;
        match attempt_cut(&v, &evaluator, &material, &normalized, cfg) {
            Ok(done) => {
                failures = 0;
                let (vol, stderr) = estimate_volume(&done.material, cfg.volume_samples, volume_seed)?;
                log::info!(
                    "cut {}: view ({:.4}, {:.4}) fitness {} d_avg {:.3e} volume {vol:.4}",
                    cuts.len() + 1,
                    v.phi,
                    v.theta,
                    outcome.fitness,
                    done.d_avg
                );
                volume = vol;
                material = done.material;
                cuts.push(CutRecord {
                    phi: v.phi,
                    theta: v.theta,
                    r: v.r,
                    frame: done.frame,
                    curve: CurveData::from(&done.curve),
                    metrics: CutMetrics {
                        fitness_px2: outcome.fitness,
                        d_avg: done.d_avg,
                        volume: vol,
                        volume_stderr: stderr,
                        ga_evaluations: outcome.evaluations,
                        fit_iterations: done.iterations,
                    },
                    contour: done.contour.vertices().iter().map(|p| [p.x, p.y]).collect(),
                    ga_seed,
                    volume_seed,
                });
                traces.push(CutTrace {
                    fit: done.trace,
                    ga_best: outcome.best_history,
                });
            }
            Err(e) => {
                failures += 1;
                log::warn!("view ({:.4}, {:.4}) failed: {e}", v.phi, v.theta);
                if failures >= cfg.max_failures {
                    return Err(Error::Aborted(format!(
                        "{failures} consecutive viewpoint failures, last: {e}"
                    )));
                }
                candidates = candidates.filtered(|c| c != &v)?;
            }
        }
    };

    let mut bottom_plane = None;
    if let Some(z) = fab.bottom_plane {
        material = material.apply_bottom_plane(z, &normalized)?;
        bottom_plane = Some(z);
    }
    debug_assert_eq!(material.cut_count(), cuts.len() + bottom_plane.is_some() as usize);

    let plan = CutPlan {
        version: PLAN_VERSION,
        config: cfg.clone(),
        fabrication: *fab,
        transform: transform.matrix(),
        mesh: MeshInfo {
            path: None,
            sha256: mesh_digest(mesh),
            vertices: mesh.vertices.len(),
            triangles: mesh.triangles.len(),
            volume: mesh_vol,
        },
        cuts,
        bottom_plane,
        termination,
    };
    Ok((plan, traces))
}

/// Replays the cuts of `plan` on pristine stock.
pub fn replay(plan: &CutPlan) -> Result<MaterialState> {
    let mut material = plan.initial_material();
    for cut in &plan.cuts {
        material = material.apply_cut_unchecked(cut.prism()?);
    }
    if let Some(z) = plan.bottom_plane {
        let empty = TriMesh {
            vertices: Vec::new(),
            triangles: Vec::new(),
        };
        material = material.apply_bottom_plane(z, &empty)?;
    }
    Ok(material)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a: Vec<u64> = (0..100).map(|k| derive_seed(7, k)).collect();
        let mut sorted = a.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 100);
        assert_eq!(derive_seed(7, 3), a[3]);
        assert_ne!(derive_seed(8, 3), a[3]);
    }

    #[test]
    fn digest_tracks_content() {
        let a = TriMesh::icosphere(0.3, 1);
        let mut b = a.clone();
        assert_eq!(mesh_digest(&a), mesh_digest(&b));
        b.vertices[0].x += 1e-12;
        assert_ne!(mesh_digest(&a), mesh_digest(&b));
        assert_eq!(mesh_digest(&a).len(), 64);
    }

    #[test]
    fn curve_data_round_trip() {
        let c = ClosedBSpline2::circle(Vec2::new(0.1, 0.2), 0.3, 9).unwrap();
        assert_eq!(CurveData::from(&c).to_curve().unwrap(), c);
    }

    #[test]
    fn fabrication_validation() {
        assert!(FabricationOptions::desk().validate().is_ok());
        let off = FabricationOptions {
            bottom_plane: Some(-0.3),
            ..FabricationOptions::default()
        };
        assert!(off.validate().is_err());
    }

    #[test]
    fn image_covers_fixture() {
        let plain = image_half_extent(&MaterialState::pristine());
        assert!((plain - 1.1 * 0.75f64.sqrt()).abs() < 1e-12);
        let with = image_half_extent(&MaterialState::with_workbench(Workbench::default()));
        assert!(with > plain);
    }
}
