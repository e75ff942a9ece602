use super::{CorrespondenceMode, EpsilonMode, FitConfig, FitState, Target};
use crate::geom::{ClosedBSpline2, Vec2};
use nalgebra::{DMatrix, DVector, Matrix2};

/// Resolution of the arc-length table used by arc-length correspondences.
const ARC_TABLE_SAMPLES: usize = 8192;

/// Frozen data of one contour sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub u: f64,
    pub foot: Vec2,
    pub tangent: Vec2,
    pub normal: Vec2,
    /// Curvature radius at the foot point (infinite where flat).
    pub radius: f64,
    /// Signed distance: negative when the sample and the curvature center
    /// lie on opposite sides of the curve.
    pub d: f64,
    /// The segment from the foot point to the sample misses the contour.
    pub visible: bool,
    /// Point the curve is pulled towards.
    pub target: Vec2,
    /// Weight of the tangential residual.
    pub tangent_weight: f64,
    /// Zero for occluded samples and, in stand-off mode, for samples already
    /// within epsilon of the curve.
    pub weight: f64,
}

impl Correspondence {
    /// Squared-distance model evaluated at a curve point.
    #[inline]
    pub fn e_sd(&self, c: Vec2) -> f64 {
        let e = c - self.target;
        self.tangent_weight * self.tangent.dot(&e).powi(2) + self.normal.dot(&e).powi(2)
    }

    fn metric(&self) -> Matrix2<f64> {
        self.tangent * self.tangent.transpose() * self.tangent_weight
            + self.normal * self.normal.transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energies {
    pub total: f64,
    pub error: f64,
    pub smooth: f64,
}

/// Recomputes correspondence parameters, local frames, signed distances,
/// visibility and targets. In arc-length mode each sample is paired with the
/// curve point at the same fraction of the total length.
pub fn update_correspondences(state: &mut FitState, target: &Target, cfg: &FitConfig) {
    let curve = &state.curve;
    let eps = state.epsilon;
    let params = match state.mode {
        CorrespondenceMode::ArcLength => arc_length_params(curve, target.arc_params()),
        CorrespondenceMode::ClosestPoint => target
            .samples()
            .iter()
            .map(|&v| curve.closest_param(v, 16))
            .collect(),
    };
    let sdm = state.mode == CorrespondenceMode::ClosestPoint;
    state.correspondences = target
        .samples()
        .iter()
        .zip(params)
        .map(|(&v, u)| correspondence(curve, u, v, eps, cfg.epsilon_mode, sdm))
        .collect();
    compute_visibility(state, target);
}

/// Curve parameters at the given arc-length fractions (ascending, measured
/// from `u = 0`).
pub(crate) fn arc_length_params(curve: &ClosedBSpline2, fractions: &[f64]) -> Vec<f64> {
    let m = ARC_TABLE_SAMPLES;
    let pts = curve.sample(m);
    let mut cumulative = Vec::with_capacity(m + 1);
    let mut s = 0.0;
    cumulative.push(0.0);
    for i in 0..m {
        s += (pts[(i + 1) % m] - pts[i]).norm();
        cumulative.push(s);
    }
    let total = s;
    let mut k = 0;
    fractions
        .iter()
        .map(|&f| {
            let goal = f * total;
            while k + 1 < m && cumulative[k + 1] < goal {
                k += 1;
            }
            let seg = cumulative[k + 1] - cumulative[k];
            let local = if seg > 0.0 { ((goal - cumulative[k]) / seg).clamp(0.0, 1.0) } else { 0.0 };
            (k as f64 + local) / m as f64
        })
        .collect()
}

/// Correspondence data for sample `v` at parameter `u`. With `sdm` the error
/// is the curvature-aware squared-distance model, otherwise the plain squared
/// distance to the fixed foot point.
fn correspondence(
    curve: &ClosedBSpline2,
    u: f64,
    v: Vec2,
    eps: f64,
    mode: EpsilonMode,
    sdm: bool,
) -> Correspondence {
    let foot = curve.point(u);
    let Ok(fr) = curve.frenet(u) else {
        return Correspondence {
            u,
            foot,
            tangent: Vec2::x(),
            normal: Vec2::y(),
            radius: f64::INFINITY,
            d: 0.0,
            visible: false,
            target: v,
            tangent_weight: 0.0,
            weight: 0.0,
        };
    };
    let gap = foot - v;
    let side = if gap.dot(&fr.normal) >= 0.0 { 1.0 } else { -1.0 };
    let (target, active) = match mode {
        EpsilonMode::StandOff if gap.norm() <= eps => (v, false),
        EpsilonMode::StandOff => (v + fr.normal * (side * eps), true),
        EpsilonMode::Literal => (v, true),
    };
    let residual = foot - target;
    let same_side = (target - foot).dot(&fr.normal) > 0.0;
    let d = if same_side { residual.norm() } else { -residual.norm() };
    let tangent_weight = if !sdm {
        1.0
    } else if d < 0.0 && fr.radius.is_finite() {
        d / (d - fr.radius)
    } else {
        0.0
    };
    Correspondence {
        u,
        foot,
        tangent: fr.tangent,
        normal: fr.normal,
        radius: fr.radius,
        d,
        visible: true,
        target,
        tangent_weight,
        weight: if active { 1.0 } else { 0.0 },
    }
}

/// A sample is occluded when the segment from its foot point to it crosses
/// the contour anywhere but at the sample itself.
pub fn compute_visibility(state: &mut FitState, target: &Target) {
    for (c, v) in state.correspondences.iter_mut().zip(target.samples()) {
        let end = c.foot + (v - c.foot) * (1.0 - 1e-7);
        let visible = (v - c.foot).norm() == 0.0 || !target.grid().segment_hits(c.foot, end);
        if !visible {
            c.weight = 0.0;
        }
        c.visible = visible;
    }
}

/// Per-sample error contributions `delta_i * E_sd` at the current curve.
pub(crate) fn sample_errors(state: &FitState) -> Vec<f64> {
    state
        .correspondences
        .iter()
        .map(|c| c.weight * c.e_sd(state.curve.point(c.u)))
        .collect()
}

/// `E = E_error + w E_smooth` with the correspondences held fixed.
pub fn evaluate_energy(state: &FitState, cfg: &FitConfig) -> Energies {
    energy_of(&state.curve, &state.correspondences, state.epsilon, cfg)
}

pub(crate) fn energy_of(
    curve: &ClosedBSpline2,
    corr: &[Correspondence],
    epsilon: f64,
    cfg: &FitConfig,
) -> Energies {
    let mut error: f64 = corr.iter().map(|c| c.weight * c.e_sd(curve.point(c.u))).sum();
    if cfg.epsilon_mode == EpsilonMode::Literal {
        error -= epsilon * corr.iter().filter(|c| c.visible).count() as f64;
    }
    let smooth = smoothness(curve, cfg);
    Energies {
        total: error + cfg.w * smooth,
        error,
        smooth,
    }
}

/// Quadrature nodes `(u, weight)` such that `sum weight * f(u)` equals
/// `n_samples` times the integral of `f` over `[0, 1)` for the polynomial
/// integrands of the smoothness term, which keeps every knot span covered.
fn smooth_nodes(curve: &ClosedBSpline2, cfg: &FitConfig) -> Vec<(f64, f64)> {
    const X: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
    const W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let scale = cfg.n_samples as f64;
    let mut nodes = Vec::with_capacity(3 * curve.len());
    for k in 0..curve.len() {
        let (a, b) = curve.span_bounds(k);
        if b <= a {
            continue;
        }
        let half = 0.5 * (b - a);
        for (x, w) in X.iter().zip(W) {
            nodes.push((a + half * (1.0 + x), scale * half * w));
        }
    }
    nodes
}

/// Smoothness derivatives are taken with respect to `u * n_total`, so knot
/// spans are unit length at the full control-point budget.
fn smooth_param_scale(cfg: &FitConfig) -> f64 {
    cfg.n_total as f64
}

fn smoothness(curve: &ClosedBSpline2, cfg: &FitConfig) -> f64 {
    let s2 = smooth_param_scale(cfg).powi(2);
    smooth_nodes(curve, cfg)
        .into_iter()
        .map(|(u, w)| {
            let [_, d1, d2] = curve.point_and_derivs(u);
            w * (cfg.eta0 * d1.norm_squared() / s2 + cfg.eta1 * d2.norm_squared() / (s2 * s2))
        })
        .sum()
}

/// `E(x) = x^T H x / 2 - b^T x + c` over the stacked control-point
/// coordinates `x = (P0x, P0y, P1x, ...)`, exact for frozen correspondences.
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub h: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: f64,
}

impl Quadratic {
    pub fn assemble(state: &FitState, cfg: &FitConfig) -> Self {
        let curve = &state.curve;
        let n = curve.len();
        let mut h = DMatrix::zeros(2 * n, 2 * n);
        let mut b = DVector::zeros(2 * n);
        let mut c = 0.0;
        for corr in &state.correspondences {
            if corr.weight == 0.0 {
                continue;
            }
            let basis = curve.basis(corr.u, 0);
            let m = corr.metric() * (2.0 * corr.weight);
            let mt = m * corr.target;
            c += 0.5 * corr.target.dot(&mt);
            for r in 0..=basis.degree {
                let i = basis.control_index(r, n);
                let br = basis.values[0][r];
                b[2 * i] += br * mt.x;
                b[2 * i + 1] += br * mt.y;
                for s in 0..=basis.degree {
                    let k = basis.control_index(s, n);
                    let w = br * basis.values[0][s];
                    add_block(&mut h, i, k, &(m * w));
                }
            }
        }
        if cfg.epsilon_mode == EpsilonMode::Literal {
            c -= state.epsilon * state.correspondences.iter().filter(|c| c.visible).count() as f64;
        }
        let s2 = smooth_param_scale(cfg).powi(2);
        for (u, weight) in smooth_nodes(curve, cfg) {
            let k1 = 2.0 * cfg.w * cfg.eta0 * weight / s2;
            let k2 = 2.0 * cfg.w * cfg.eta1 * weight / (s2 * s2);
            let basis = curve.basis(u, 2);
            for r in 0..=basis.degree {
                let i = basis.control_index(r, n);
                for s in 0..=basis.degree {
                    let k = basis.control_index(s, n);
                    let w = k1 * basis.values[1][r] * basis.values[1][s]
                        + k2 * basis.values[2][r] * basis.values[2][s];
                    h[(2 * i, 2 * k)] += w;
                    h[(2 * i + 1, 2 * k + 1)] += w;
                }
            }
        }
        Self { h, b, c }
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.h * x)) - self.b.dot(x) + self.c
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.h * x - &self.b
    }
}

fn add_block(h: &mut DMatrix<f64>, i: usize, k: usize, m: &Matrix2<f64>) {
    h[(2 * i, 2 * k)] += m[(0, 0)];
    h[(2 * i, 2 * k + 1)] += m[(0, 1)];
    h[(2 * i + 1, 2 * k)] += m[(1, 0)];
    h[(2 * i + 1, 2 * k + 1)] += m[(1, 1)];
}

pub(crate) fn stack(points: &[Vec2]) -> DVector<f64> {
    DVector::from_iterator(2 * points.len(), points.iter().flat_map(|p| [p.x, p.y]))
}

#[cfg(test)]
pub(crate) fn unstack(x: &DVector<f64>) -> Vec<Vec2> {
    (0..x.len() / 2).map(|i| Vec2::new(x[2 * i], x[2 * i + 1])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::{init_curve, FitState};
    use crate::geom::Polygon2;
    use rand::{Rng, SeedableRng};

    /// Direct evaluation of one squared-distance term from its definition.
    fn e_sd_oracle(c: Vec2, v: Vec2, t: Vec2, n: Vec2, rho: f64, d: f64) -> f64 {
        let e = c - v;
        if d < 0.0 {
            d / (d - rho) * e.dot(&t).powi(2) + e.dot(&n).powi(2)
        } else {
            e.dot(&n).powi(2)
        }
    }

    #[test]
    fn unit_circle_outer_sample() {
        let circle = ClosedBSpline2::circle(Vec2::zeros(), 1.0, 512).unwrap();
        let u = 0.1;
        let foot = circle.point(u);
        let fr = circle.frenet(u).unwrap();
        assert!((fr.radius - 1.0).abs() < 1e-4);
        // local frame coordinates (0, -0.5): half a unit beyond the curve
        let v = foot - fr.normal * 0.5;
        let c = correspondence(&circle, u, v, 0.0, EpsilonMode::Literal, true);
        assert!((c.d + 0.5).abs() < 1e-12);
        assert!((c.tangent_weight - 1.0 / 3.0).abs() < 1e-4);
        let probe = foot + Vec2::new(0.2, -0.3);
        let expected = e_sd_oracle(probe, v, fr.tangent, fr.normal, fr.radius, -0.5);
        assert!((c.e_sd(probe) - expected).abs() < 1e-12);
        let e = probe - v;
        let symbolic = e.dot(&fr.normal).powi(2) + e.dot(&fr.tangent).powi(2) / 3.0;
        assert!((c.e_sd(probe) - symbolic).abs() < 1e-4);
    }

    #[test]
    fn curve_through_samples_has_zero_error() {
        let circle = ClosedBSpline2::circle(Vec2::zeros(), 1.0, 64).unwrap();
        for i in 0..16 {
            let u = i as f64 / 16.0;
            let c = correspondence(&circle, u, circle.point(u), 0.0, EpsilonMode::Literal, true);
            assert_eq!(c.e_sd(circle.point(u)), 0.0);
        }
    }

    #[test]
    fn inside_sample_uses_normal_only() {
        let circle = ClosedBSpline2::circle(Vec2::zeros(), 1.0, 128).unwrap();
        let v = Vec2::new(0.6, 0.1);
        let c = correspondence(&circle, 0.0, v, 0.0, EpsilonMode::Literal, true);
        assert!(c.d > 0.0 && c.d < c.radius);
        assert_eq!(c.tangent_weight, 0.0);
        let e = c.foot - v;
        assert!((c.e_sd(c.foot) - e.dot(&c.normal).powi(2)).abs() < 1e-15);
    }

    fn random_state(rng: &mut impl Rng) -> (FitState, FitConfig) {
        let k = rng.gen_range(5..12);
        let pts: Vec<Vec2> = (0..k)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / k as f64;
                Vec2::new(a.cos(), a.sin()) * rng.gen_range(0.5..1.0)
            })
            .collect();
        let g = Polygon2::new(pts).unwrap();
        let cfg = FitConfig {
            n_samples: 200,
            n_init: rng.gen_range(8..30),
            ..FitConfig::default()
        };
        let target = crate::fit::Target::new(&g, &cfg).unwrap();
        let mut state = init_curve(&target, &cfg).unwrap();
        let jitter: Vec<Vec2> = state
            .curve
            .control_points()
            .iter()
            .map(|p| p * rng.gen_range(0.8..1.1))
            .collect();
        state.curve = state.curve.with_control_points(jitter);
        state.epsilon = rng.gen_range(0.0..0.02);
        update_correspondences(&mut state, &target, &cfg);
        (state, cfg)
    }

    #[test]
    fn quadratic_matches_direct_energy() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let (state, cfg) = random_state(&mut rng);
            let q = Quadratic::assemble(&state, &cfg);
            let x = stack(state.curve.control_points());
            let direct = evaluate_energy(&state, &cfg).total;
            assert!((q.value(&x) - direct).abs() <= 1e-10 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let (state, cfg) = random_state(&mut rng);
            let q = Quadratic::assemble(&state, &cfg);
            let x = stack(state.curve.control_points());
            let g = q.gradient(&x);
            let h = 1e-6;
            let energy = |x: &DVector<f64>| {
                energy_of(&state.curve.with_control_points(unstack(x)), &state.correspondences, state.epsilon, &cfg).total
            };
            let fd = DVector::from_fn(x.len(), |i, _| {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                (energy(&xp) - energy(&xm)) / (2.0 * h)
            });
            let rel = (&g - &fd).norm() / g.norm().max(1e-12);
            assert!(rel < 1e-4, "relative gradient error {rel}");
        }
    }
}
