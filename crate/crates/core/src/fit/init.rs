use super::{check_constraints, CorrespondenceMode, FitConfig, FitState};
use crate::geom::{convex_hull, simplify_convex_hull, ClosedBSpline2, EdgeGrid, Polygon2, Vec2};
use crate::{Error, Result};
use std::f64::consts::TAU;

const MAX_GROWTH_STEPS: usize = 40;

/// The contour being fitted, recentered at its centroid and rotated so that
/// vertex 0 is the first vertex of the simplified convex hull.
#[derive(Debug, Clone)]
pub struct Target {
    polygon: Polygon2,
    center: Vec2,
    grid: EdgeGrid,
    samples: Vec<Vec2>,
    /// Arc-length fraction of each sample from vertex 0.
    arc: Vec<f64>,
    /// Simplified hull vertices with their arc-length fractions.
    hull: Vec<(f64, Vec2)>,
    d_bb: f64,
}

impl Target {
    pub fn new(g: &Polygon2, cfg: &FitConfig) -> Result<Self> {
        if !g.is_simple() {
            return Err(Error::NonSimplePolygon("contour self-intersects".into()));
        }
        let center = g.centroid();
        let g = g.translated(-center);
        let d_bb = g.bbox_diagonal();
        let hull = convex_hull(g.vertices())?;
        let hull = simplify_convex_hull(&hull, cfg.beta * d_bb, cfg.min_hull_vertices);
        let first = hull.vertices()[0];
        let start = g
            .vertices()
            .iter()
            .position(|&v| v == first)
            .expect("hull vertices are polygon vertices");
        let polygon = g.rotated_to(start);

        let verts = polygon.vertices();
        let mut cumulative = Vec::with_capacity(verts.len());
        let mut s = 0.0;
        for i in 0..verts.len() {
            cumulative.push(s);
            s += (verts[(i + 1) % verts.len()] - verts[i]).norm();
        }
        let total = s;
        let mut hull_params: Vec<(f64, Vec2)> = hull
            .vertices()
            .iter()
            .map(|h| {
                let i = verts.iter().position(|v| v == h).expect("hull vertex on polygon");
                (cumulative[i] / total, *h)
            })
            .collect();
        hull_params.sort_by(|a, b| a.0.total_cmp(&b.0));

        let (samples, arc) = polygon.sample_uniform(cfg.n_samples);
        Ok(Self {
            grid: EdgeGrid::from_closed(polygon.vertices()),
            polygon,
            center,
            samples,
            arc,
            hull: hull_params,
            d_bb,
        })
    }

    /// A target used only for constraint checks, in the polygon's own frame.
    pub(crate) fn uncentered(g: &Polygon2) -> Self {
        Self {
            grid: EdgeGrid::from_closed(g.vertices()),
            polygon: g.clone(),
            center: Vec2::zeros(),
            samples: Vec::new(),
            arc: Vec::new(),
            hull: Vec::new(),
            d_bb: g.bbox_diagonal(),
        }
    }

    pub fn polygon(&self) -> &Polygon2 {
        &self.polygon
    }

    /// Offset that was subtracted from the input polygon.
    pub fn center(&self) -> Vec2 {
        self.center
    }

    pub fn grid(&self) -> &EdgeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Vec2] {
        &self.samples
    }

    pub fn arc_params(&self) -> &[f64] {
        &self.arc
    }

    pub fn hull(&self) -> &[(f64, Vec2)] {
        &self.hull
    }

    pub fn d_bb(&self) -> f64 {
        self.d_bb
    }
}

/// Places control points on a circle around the centered contour, guided by
/// the simplified hull, growing the circle until the curve is feasible.
pub fn init_curve(target: &Target, cfg: &FitConfig) -> Result<FitState> {
    let r0 = cfg.radius_factor
        * target
            .polygon()
            .vertices()
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
    let mut radius = r0;
    for _ in 0..MAX_GROWTH_STEPS {
        let curve = circle_curve(target, cfg.n_init, radius)?;
        if check_constraints(&curve, target).is_ok() {
            return Ok(FitState {
                curve,
                correspondences: Vec::new(),
                epsilon: cfg.epsilon0 * target.d_bb(),
                mode: CorrespondenceMode::ArcLength,
                iteration: 0,
            });
        }
        radius *= cfg.radius_growth;
    }
    Err(Error::InitializationFailed(format!(
        "no feasible circle up to radius {radius}"
    )))
}

/// Curve with hull-guided knots and control points on the circle of the given
/// radius; knot `m` is paired with control point `m - 2`, whose basis peaks
/// near it.
pub(crate) fn circle_curve(target: &Target, n_init: usize, radius: f64) -> Result<ClosedBSpline2> {
    let hull = target.hull();
    let nh = hull.len();
    let mut angles: Vec<f64> = hull.iter().map(|(_, v)| v.y.atan2(v.x)).collect();
    for i in 1..nh {
        while angles[i] <= angles[i - 1] {
            angles[i] += TAU;
        }
    }
    let mut pairs: Vec<(f64, f64)> = hull.iter().map(|h| h.0).zip(angles.iter().copied()).collect();
    let extra = n_init.saturating_sub(nh);
    let bounds = |i: usize| {
        if i + 1 < nh {
            (hull[i].0, angles[i], hull[i + 1].0, angles[i + 1])
        } else {
            (hull[i].0, angles[i], 1.0, angles[0] + TAU)
        }
    };
    // spread the remaining knots evenly, each hull interval receiving a share
    // proportional to its length (largest remainder)
    let lengths: Vec<f64> = (0..nh).map(|i| bounds(i).2 - bounds(i).0).collect();
    let mut share: Vec<usize> = lengths.iter().map(|l| (l * extra as f64) as usize).collect();
    let mut order: Vec<usize> = (0..nh).collect();
    order.sort_by(|&a, &b| {
        let ra = lengths[a] * extra as f64 - share[a] as f64;
        let rb = lengths[b] * extra as f64 - share[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let missing = extra - share.iter().sum::<usize>();
    for &i in order.iter().take(missing) {
        share[i] += 1;
    }
    for i in 0..nh {
        let (u0, a0, u1, a1) = bounds(i);
        for s in 1..=share[i] {
            let f = s as f64 / (share[i] + 1) as f64;
            pairs.push((u0 + f * (u1 - u0), a0 + f * (a1 - a0)));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.dedup_by(|b, a| (b.0 - a.0).abs() < 1e-9);
    let n = pairs.len();
    let knots: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut points = vec![Vec2::zeros(); n];
    for (m, &(_, a)) in pairs.iter().enumerate() {
        points[(m + n - 2) % n] = Vec2::new(a.cos(), a.sin()) * radius;
    }
    ClosedBSpline2::new(3, knots, points)
}
