//! Constrained approximation of a closed contour polygon by a periodic cubic
//! B-spline that encloses it and never touches it.
//!
//! The fit alternates a Newton direction for a quadratic squared-distance
//! model with a per-control-point line search whose step is capped by
//! continuous collision detection, so every accepted iterate stays feasible.

mod energy;
mod init;
mod step;

pub use energy::{
    compute_visibility, evaluate_energy, update_correspondences, Correspondence, Energies, Quadratic,
};
pub use init::{init_curve, Target};
pub use step::{add_control_points, apply_step, joint_step, newton_step, StepReport};

use crate::geom::{ClosedBSpline2, EdgeGrid, IndexedPolygon, Polygon2};
use crate::material::CUT_POLYGON_SAMPLES;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Error thresholds are stated in pixels of a frame where the contour's
/// bounding-box diagonal spans this many pixels.
pub const REFERENCE_PIXELS: f64 = 256.0;

/// How the relaxation `epsilon` enters the error term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonMode {
    /// Each sample pulls the curve towards a point `epsilon` outside it, and
    /// samples already within `epsilon` do not pull at all.
    StandOff,
    /// `epsilon` is subtracted from every visible sample's term.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrespondenceMode {
    ArcLength,
    ClosestPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub n_init: usize,
    pub n_total: usize,
    pub n_add: usize,
    /// Minimum span length for refinement, relative to the contour's `d_bb`.
    pub l_min: f64,
    /// Hull simplification tolerance, relative to `d_bb`.
    pub beta: f64,
    /// Initial relaxation, relative to `d_bb`.
    pub epsilon0: f64,
    pub epsilon_decay: f64,
    pub epsilon_mode: EpsilonMode,
    pub w: f64,
    pub eta0: f64,
    pub eta1: f64,
    /// Samples on the contour and on the curve.
    pub n_samples: usize,
    pub max_iter: usize,
    /// Stop once `E_error` falls below this times `N_g` squared reference
    /// pixels.
    pub error_threshold_coeff: f64,
    /// Binary refinements per knot span for collision sampling.
    pub ccd_refinement: u32,
    pub correspondence_switch_rel: f64,
    /// Closest-point correspondences are only adopted while `E_error`
    /// exceeds this times `N_g * d_bb`, measured in reference pixels.
    pub correspondence_switch_abs: f64,
    pub min_hull_vertices: usize,
    pub radius_factor: f64,
    pub radius_growth: f64,
    pub armijo_c: f64,
    pub armijo_backtrack: f64,
    pub ccd_safety: f64,
    /// Try a common step for all control points before the per-point pass.
    pub joint_step: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            n_init: 40,
            n_total: 120,
            n_add: 3,
            l_min: 0.0025,
            beta: 0.02,
            epsilon0: 0.01,
            epsilon_decay: 0.8,
            epsilon_mode: EpsilonMode::StandOff,
            w: 1.0,
            eta0: 0.0,
            eta1: 1.0,
            n_samples: 1000,
            max_iter: 30,
            error_threshold_coeff: 1e-6,
            ccd_refinement: 8,
            correspondence_switch_rel: 5e-2,
            correspondence_switch_abs: 1.0 / 20.0,
            min_hull_vertices: 10,
            radius_factor: 1.5,
            radius_growth: 1.2,
            armijo_c: 1e-4,
            armijo_backtrack: 0.5,
            ccd_safety: 0.99,
            joint_step: true,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("fit config: {what}")));
        if self.n_init < 4 || self.n_total < self.n_init {
            return bad("need 4 <= n_init <= n_total");
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay < 1.0) {
            return bad("epsilon_decay must lie in (0, 1)");
        }
        if self.n_samples < 8 || self.ccd_refinement > 16 {
            return bad("sample counts out of range");
        }
        let positive = [
            self.l_min,
            self.beta,
            self.radius_factor,
            self.armijo_c,
            self.armijo_backtrack,
            self.ccd_safety,
        ];
        if positive.iter().any(|&v| !(v > 0.0)) || self.radius_growth <= 1.0 {
            return bad("non-positive tolerance");
        }
        if [self.epsilon0, self.w, self.eta0, self.eta1].iter().any(|&v| v < 0.0) {
            return bad("negative weight");
        }
        Ok(())
    }
}

/// Loop state of the fit.
#[derive(Debug, Clone)]
pub struct FitState {
    pub curve: ClosedBSpline2,
    pub correspondences: Vec<Correspondence>,
    pub epsilon: f64,
    pub mode: CorrespondenceMode,
    pub iteration: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub energy: f64,
    pub e_error: f64,
    pub e_smooth: f64,
    pub control_points: usize,
    pub d_avg: f64,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    /// Fitted curve in the coordinates of the input polygon.
    pub curve: ClosedBSpline2,
    pub d_avg: f64,
    pub iterations: usize,
    /// Iteration at which closest-point correspondences were adopted.
    pub switched_at: Option<usize>,
    pub trace: Vec<TraceRow>,
}

/// Fits a closed cubic B-spline around `g`.
pub fn fit(g: &Polygon2, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    let target = Target::new(g, cfg)?;
    let mut state = init_curve(&target, cfg)?;
    update_correspondences(&mut state, &target, cfg);
    let n_g = target.samples().len() as f64;
    let pixel = target.d_bb() / REFERENCE_PIXELS;
    let threshold = cfg.error_threshold_coeff * n_g * pixel * pixel;
    let switch_floor = cfg.correspondence_switch_abs * n_g * REFERENCE_PIXELS * pixel * pixel;
    let mut trace = Vec::new();
    let mut switched_at = None;

    while state.iteration < cfg.max_iter {
        let before = evaluate_energy(&state, cfg);
        if before.error <= threshold {
            break;
        }
        let quad = Quadratic::assemble(&state, cfg);
        if cfg.joint_step {
            let dir = newton_step(&quad, &state.curve);
            joint_step(&mut state, &quad, &dir, &target, cfg)?;
        }
        let dir = newton_step(&quad, &state.curve);
        apply_step(&mut state, &quad, &dir, &target, cfg)?;
        let after = evaluate_energy(&state, cfg);

        let decrease = before.error - after.error;
        if state.mode == CorrespondenceMode::ArcLength
            && decrease < cfg.correspondence_switch_rel * after.error
            && after.error > switch_floor
        {
            state.mode = CorrespondenceMode::ClosestPoint;
            switched_at = Some(state.iteration);
            log::debug!("switching to closest-point correspondences at {}", state.iteration);
        }
        update_correspondences(&mut state, &target, cfg);
        add_control_points(&mut state, &target, cfg);
        update_correspondences(&mut state, &target, cfg);
        check_constraints(&state.curve, &target)?;

        state.epsilon *= cfg.epsilon_decay;
        state.iteration += 1;
        let e = evaluate_energy(&state, cfg);
        trace.push(TraceRow {
            iteration: state.iteration,
            energy: e.total,
            e_error: e.error,
            e_smooth: e.smooth,
            control_points: state.curve.len(),
            d_avg: d_avg(&state.curve, target.polygon(), cfg.n_samples),
        });
        log::trace!("fit iteration {}: {:?}", state.iteration, trace.last());
    }

    let d = d_avg(&state.curve, target.polygon(), cfg.n_samples);
    Ok(FitResult {
        curve: state.curve.translated(target.center()),
        d_avg: d,
        iterations: state.iteration,
        switched_at,
        trace,
    })
}

/// Bidirectional average distance between a curve and a polygon, each side
/// sampled with `n` points uniformly in arc length (polygon) or parameter
/// (curve).
pub fn d_avg(curve: &ClosedBSpline2, g: &Polygon2, n: usize) -> f64 {
    let dense = EdgeGrid::from_closed(&curve.sample(16 * n.max(256)));
    let (gs, _) = g.sample_uniform(n);
    let to_curve: f64 = gs.iter().map(|&p| dense.distance(p)).sum();
    let g_grid = EdgeGrid::from_closed(g.vertices());
    let to_g: f64 = curve.sample(n).iter().map(|&p| g_grid.distance(p)).sum();
    to_curve / (2.0 * n as f64) + to_g / (2.0 * n as f64)
}

/// The curve polygon used for cutting must neither touch `g` nor leave any
/// vertex of `g` outside.
pub fn check_constraints(curve: &ClosedBSpline2, target: &Target) -> Result<()> {
    let poly = curve.sample(CUT_POLYGON_SAMPLES);
    let n = poly.len();
    if let Some(i) = (0..n).find(|&i| target.grid().segment_hits(poly[i], poly[(i + 1) % n])) {
        return Err(Error::InvalidCollisionState(format!(
            "curve chord {i} touches the contour"
        )));
    }
    let region = IndexedPolygon::new(poly);
    if let Some(v) = target.polygon().vertices().iter().find(|&&v| !region.contains(v)) {
        return Err(Error::InvalidCollisionState(format!(
            "contour vertex ({}, {}) outside the curve",
            v.x, v.y
        )));
    }
    Ok(())
}

/// [`check_constraints`] against a polygon in its own coordinates.
pub fn check_polygon_constraints(curve: &ClosedBSpline2, g: &Polygon2) -> Result<()> {
    let target = Target::uncentered(g);
    check_constraints(curve, &target)
}
