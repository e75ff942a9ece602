use super::energy::{sample_errors, stack, Quadratic};
use super::{FitConfig, FitState, Target};
use crate::geom::{ccd_max_step, ccd_max_step_parallel, ClosedBSpline2, Vec2};
use crate::material::CUT_POLYGON_SAMPLES;
use nalgebra::DVector;

/// Relative Tikhonov regularization of the Newton system.
const NEWTON_REGULARIZATION: f64 = 1e-8;
/// Unobstructed step cap, relative to the contour's `d_bb`.
const STEP_CAP: f64 = 10.0;
const MAX_BACKTRACKS: usize = 60;
/// Minimum approach distance kept from the contour, relative to its `d_bb`.
const CLEARANCE: f64 = 1e-6;

/// Usable fraction of a collision time `t_max` for points moving at most
/// `speed`: the safety factor plus a fixed clearance.
fn safe_step(t_max: f64, speed: f64, d_bb: f64, safety: f64) -> f64 {
    (safety * t_max).min(t_max - CLEARANCE * d_bb / speed).max(0.0)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepReport {
    pub moved: usize,
    /// Points without a descent component or with a vanishing step.
    pub skipped: usize,
    /// Moves undone by the post-move collision check.
    pub reverted: usize,
    /// Change of the frozen quadratic energy.
    pub energy_change: f64,
}

/// Per-control-point displacement towards the minimizer of the quadratic,
/// `(H + lambda I) D = b - H x`.
pub fn newton_step(quad: &Quadratic, curve: &ClosedBSpline2) -> Vec<Vec2> {
    let dim = quad.h.nrows();
    let mean_diag = quad.h.diagonal().mean();
    let lambda = NEWTON_REGULARIZATION * if mean_diag > 0.0 { mean_diag } else { 1.0 };
    let mut a = quad.h.clone();
    for i in 0..dim {
        a[(i, i)] += lambda;
    }
    let rhs = -quad.gradient(&stack(curve.control_points()));
    let step = match a.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => a.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(dim)),
    };
    (0..dim / 2)
        .map(|i| Vec2::new(step[2 * i], step[2 * i + 1]))
        .collect()
}

/// Moves all control points together by `t * dir`, with `t` capped by
/// collision detection of the cut polygon and chosen by Armijo backtracking
/// from `min(1, t_max / 2)`. Returns the accepted `t` (zero when blocked).
pub fn joint_step(
    state: &mut FitState,
    quad: &Quadratic,
    dir: &[Vec2],
    target: &Target,
    cfg: &FitConfig,
) -> crate::Result<f64> {
    let x = stack(state.curve.control_points());
    let d = stack(dir);
    let slope = quad.gradient(&x).dot(&d);
    let curvature = d.dot(&(&quad.h * &d));
    if !(slope < 0.0) {
        return Ok(0.0);
    }
    let mut samples = state.curve.sample(CUT_POLYGON_SAMPLES);
    let mut velocities = state.curve.with_control_points(dir.to_vec()).sample(CUT_POLYGON_SAMPLES);
    samples.push(samples[0]);
    velocities.push(velocities[0]);
    let max_speed = velocities.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if max_speed == 0.0 {
        return Ok(0.0);
    }
    let cap = STEP_CAP * target.d_bb() / max_speed;
    let t_hit = ccd_max_step(&samples, &velocities, target.polygon(), cap)?;
    let t_max = safe_step(t_hit, max_speed, target.d_bb(), cfg.ccd_safety);
    let decrease = |t: f64| t * slope + 0.5 * t * t * curvature;
    let mut t = (0.5 * t_max).min(1.0);
    for _ in 0..MAX_BACKTRACKS {
        if decrease(t) <= cfg.armijo_c * t * slope {
            let points = state
                .curve
                .control_points()
                .iter()
                .zip(dir)
                .map(|(p, d)| p + d * t)
                .collect();
            state.curve = state.curve.with_control_points(points);
            return Ok(t);
        }
        t *= cfg.armijo_backtrack;
    }
    Ok(0.0)
}

/// Basis value of control point `j` at `u`.
fn basis_weight(curve: &ClosedBSpline2, j: usize, u: f64) -> f64 {
    let n = curve.len();
    let b = curve.basis(u, 0);
    (0..=b.degree)
        .filter(|&r| b.control_index(r, n) == j)
        .map(|r| b.values[0][r])
        .sum()
}

/// Parameter interval where control point `j` has influence.
fn support(curve: &ClosedBSpline2, j: usize) -> (f64, f64) {
    let j = j as isize;
    (curve.knot(j), curve.knot(j + curve.degree() as isize + 1))
}

/// Mean error of the samples inside each control point's influence interval.
pub(crate) fn control_point_errors(state: &FitState) -> Vec<f64> {
    let n = state.curve.len();
    let mut sum = vec![0.0; n];
    let mut count = vec![0usize; n];
    for (corr, e) in state.correspondences.iter().zip(sample_errors(state)) {
        let b = state.curve.basis(corr.u, 0);
        for r in 0..=b.degree {
            let i = b.control_index(r, n);
            sum[i] += e;
            count[i] += 1;
        }
    }
    sum.iter()
        .zip(&count)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect()
}

/// Mean error of the samples inside each knot span.
pub(crate) fn span_errors(state: &FitState) -> Vec<f64> {
    let n = state.curve.len();
    let mut sum = vec![0.0; n];
    let mut count = vec![0usize; n];
    for (corr, e) in state.correspondences.iter().zip(sample_errors(state)) {
        let k = state.curve.find_span(corr.u);
        sum[k] += e;
        count[k] += 1;
    }
    sum.iter()
        .zip(&count)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect()
}

/// Curve points at the given parameters with the speed control point `j`
/// imparts to each of them.
fn moving_polyline(curve: &ClosedBSpline2, j: usize, params: impl Iterator<Item = f64>) -> (Vec<Vec2>, Vec<f64>) {
    params
        .map(|u| (curve.point(u), basis_weight(curve, j, u)))
        .unzip()
}

/// Parameters of the cut polygon's vertices spanning the influence interval,
/// including one fixed vertex on each side.
fn chord_params(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    let m = CUT_POLYGON_SAMPLES as f64;
    let first = (lo * m).floor() as i64;
    let last = (hi * m).ceil() as i64;
    (first..=last).map(move |i| i as f64 / m)
}

/// Moves control points one at a time in descending order of their mean
/// error. Each step is capped by collision detection against the contour and
/// then chosen by Armijo backtracking from half the cap, or from the full
/// Newton step when that is smaller.
pub fn apply_step(
    state: &mut FitState,
    quad: &Quadratic,
    dir: &[Vec2],
    target: &Target,
    cfg: &FitConfig,
) -> crate::Result<StepReport> {
    let n = state.curve.len();
    if dir.len() != n {
        return Err(crate::Error::InvalidArgument(format!(
            "{} displacements for {n} control points",
            dir.len()
        )));
    }
    let mut x = stack(state.curve.control_points());
    let mut grad = quad.gradient(&x);
    let e_avg = control_point_errors(state);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| e_avg[b].total_cmp(&e_avg[a]).then(a.cmp(&b)));

    let obstacle = target.polygon().vertices();
    let per_span = 1usize << cfg.ccd_refinement;
    let mut report = StepReport::default();
    for j in order {
        let d = dir[j];
        let slope = grad[2 * j] * d.x + grad[2 * j + 1] * d.y;
        let block = quad.h.fixed_view::<2, 2>(2 * j, 2 * j);
        let curvature = d.dot(&(block * d));
        if !(slope < 0.0) || d.norm() == 0.0 {
            report.skipped += 1;
            continue;
        }
        let curve = &state.curve;
        let (lo, hi) = support(curve, j);
        let spans = curve.degree() + 1;
        let dense = spans * per_span;
        let (samples, speeds) = moving_polyline(
            curve,
            j,
            (0..=dense).map(|s| lo + (hi - lo) * s as f64 / dense as f64),
        );
        let (chords, chord_speeds) = moving_polyline(curve, j, chord_params(lo, hi));
        let max_speed = speeds.iter().cloned().fold(0.0, f64::max);
        if max_speed <= 0.0 {
            report.skipped += 1;
            continue;
        }
        let cap = STEP_CAP * target.d_bb() / (max_speed * d.norm());
        let t_curve = ccd_max_step_parallel(&samples, &speeds, d, obstacle, cap);
        let t_chord = ccd_max_step_parallel(&chords, &chord_speeds, d, obstacle, cap);
        let t_max = safe_step(t_curve.min(t_chord), max_speed * d.norm(), target.d_bb(), cfg.ccd_safety);

        let decrease = |t: f64| t * slope + 0.5 * t * t * curvature;
        let mut t = (0.5 * t_max).min(1.0);
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            if decrease(t) <= cfg.armijo_c * t * slope {
                accepted = true;
                break;
            }
            t *= cfg.armijo_backtrack;
        }
        if !accepted || t <= 0.0 {
            report.skipped += 1;
            continue;
        }

        let mut points = curve.control_points().to_vec();
        points[j] += d * t;
        let moved = curve.with_control_points(points);
        let after: Vec<Vec2> = chord_params(lo, hi).map(|u| moved.point(u)).collect();
        if after.windows(2).any(|w| target.grid().segment_hits(w[0], w[1])) {
            report.reverted += 1;
            continue;
        }
        state.curve = moved;
        let step = DVector::from_column_slice(&[d.x * t, d.y * t]);
        grad += quad.h.columns(2 * j, 2) * &step;
        x[2 * j] += step[0];
        x[2 * j + 1] += step[1];
        report.energy_change += decrease(t);
        report.moved += 1;
    }
    Ok(report)
}

/// Inserts knots inside the spans with the largest mean error, skipping
/// spans shorter than `l_min`. The curve geometry is unchanged.
pub fn add_control_points(state: &mut FitState, target: &Target, cfg: &FitConfig) -> usize {
    let n = state.curve.len();
    if n >= cfg.n_total {
        return 0;
    }
    let errors = span_errors(state);
    let min_len = cfg.l_min * target.d_bb();
    let mut spans: Vec<usize> = (0..n)
        .filter(|&k| errors[k] > 0.0 && state.curve.span_length(k) > min_len)
        .collect();
    spans.sort_by(|&a, &b| errors[b].total_cmp(&errors[a]).then(a.cmp(&b)));
    spans.truncate(cfg.n_add);

    let mut params = Vec::new();
    for &k in &spans {
        let (a, b) = state.curve.span_bounds(k);
        for i in 1..=cfg.n_add {
            params.push(a + (b - a) * i as f64 / (cfg.n_add + 1) as f64);
        }
    }
    let mut inserted = 0;
    for u in params {
        if state.curve.len() >= cfg.n_total {
            break;
        }
        match state.curve.insert_knot(u) {
            Ok(c) => {
                state.curve = c;
                inserted += 1;
            }
            Err(e) => log::debug!("skipping knot insertion at {u}: {e}"),
        }
    }
    inserted
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::energy::{energy_of, update_correspondences};
    use crate::fit::{check_constraints, evaluate_energy, init_curve, Target};
    use crate::geom::Polygon2;
    use rand::{Rng, SeedableRng};

    fn star(points: usize, inner: f64) -> Polygon2 {
        Polygon2::star(points, 1.0, inner, 1, Vec2::zeros()).unwrap()
    }

    fn setup(g: &Polygon2, cfg: &FitConfig) -> (Target, FitState) {
        let target = Target::new(g, cfg).unwrap();
        let mut state = init_curve(&target, cfg).unwrap();
        update_correspondences(&mut state, &target, cfg);
        (target, state)
    }

    #[test]
    fn newton_direction_descends() {
        let cfg = FitConfig::default();
        let (_, state) = setup(&star(5, 0.5), &cfg);
        let quad = Quadratic::assemble(&state, &cfg);
        let dir = newton_step(&quad, &state.curve);
        let x = stack(state.curve.control_points());
        let g = quad.gradient(&x);
        let d = stack(&dir);
        assert!(g.dot(&d) < 0.0);
        let full: Vec<Vec2> = state.curve.control_points().iter().zip(&dir).map(|(p, d)| p + d).collect();
        assert!(quad.value(&stack(&full)) < quad.value(&x));
    }

    #[test]
    fn stationary_curve_has_no_displacement() {
        // samples taken on the curve itself with zero slack
        let curve = ClosedBSpline2::circle(Vec2::zeros(), 1.0, 12).unwrap();
        let g = Polygon2::new(curve.sample(400)).unwrap();
        let cfg = FitConfig {
            epsilon0: 0.0,
            epsilon_mode: crate::fit::EpsilonMode::Literal,
            w: 0.0,
            ..FitConfig::default()
        };
        let target = Target::new(&g, &cfg).unwrap();
        let mut state = FitState {
            curve: curve.translated(-target.center()),
            correspondences: Vec::new(),
            epsilon: 0.0,
            mode: crate::fit::CorrespondenceMode::ClosestPoint,
            iteration: 0,
        };
        update_correspondences(&mut state, &target, &cfg);
        // samples of a chord polygon sit slightly inside; move them onto the curve
        for c in &mut state.correspondences {
            c.target = c.foot;
        }
        let quad = Quadratic::assemble(&state, &cfg);
        let dir = newton_step(&quad, &state.curve);
        let norm = stack(&dir).norm();
        assert!(norm <= 1e-8, "{norm}");
    }

    #[test]
    fn steps_decrease_energy_and_stay_feasible() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..6 {
            let k = rng.gen_range(4..9);
            let g = star(k, rng.gen_range(0.3..0.8));
            let cfg = FitConfig {
                n_init: rng.gen_range(12..40),
                ..FitConfig::default()
            };
            let (target, mut state) = setup(&g, &cfg);
            for _ in 0..3 {
                let before = evaluate_energy(&state, &cfg).total;
                let quad = Quadratic::assemble(&state, &cfg);
                let dir = newton_step(&quad, &state.curve);
                let report = apply_step(&mut state, &quad, &dir, &target, &cfg).unwrap();
                let after = evaluate_energy(&state, &cfg).total;
                assert!(after <= before + 1e-12 * before.abs(), "{before} -> {after}");
                assert!(report.energy_change <= 0.0);
                assert!((before + report.energy_change - after).abs() <= 1e-8 * before.abs().max(1.0));
                check_constraints(&state.curve, &target).unwrap();
                update_correspondences(&mut state, &target, &cfg);
            }
        }
    }

    #[test]
    fn unobstructed_step_is_pure_armijo() {
        // a tiny contour deep inside a large circle
        let g = Polygon2::new(vec![
            Vec2::new(-0.01, -0.01),
            Vec2::new(0.01, -0.01),
            Vec2::new(0.01, 0.01),
            Vec2::new(-0.01, 0.01),
        ])
        .unwrap();
        let cfg = FitConfig::default();
        let target = Target::new(&g, &cfg).unwrap();
        let mut state = FitState {
            curve: ClosedBSpline2::circle(Vec2::zeros(), 10.0, 40).unwrap(),
            correspondences: Vec::new(),
            epsilon: 0.0,
            mode: crate::fit::CorrespondenceMode::ArcLength,
            iteration: 0,
        };
        update_correspondences(&mut state, &target, &cfg);
        let quad = Quadratic::assemble(&state, &cfg);
        let dir = newton_step(&quad, &state.curve);
        let x0 = state.curve.control_points().to_vec();
        let e_avg = control_point_errors(&state);
        let first = (0..x0.len())
            .max_by(|&a, &b| e_avg[a].total_cmp(&e_avg[b]).then(b.cmp(&a)))
            .unwrap();
        let grad = quad.gradient(&stack(&x0));
        let d = dir[first];
        let slope = grad[2 * first] * d.x + grad[2 * first + 1] * d.y;
        let h = d.dot(&(quad.h.fixed_view::<2, 2>(2 * first, 2 * first) * d));
        let (lo, hi) = support(&state.curve, first);
        let dense = 4 << cfg.ccd_refinement;
        let max_speed = (0..=dense)
            .map(|s| basis_weight(&state.curve, first, lo + (hi - lo) * s as f64 / dense as f64))
            .fold(0.0, f64::max);
        let cap = STEP_CAP * target.d_bb() / (max_speed * d.norm());
        let f = |t: f64| t * slope + 0.5 * t * t * h;
        let mut expected = (0.5 * cfg.ccd_safety * cap).min(1.0);
        while f(expected) > cfg.armijo_c * expected * slope {
            expected *= cfg.armijo_backtrack;
        }
        apply_step(&mut state, &quad, &dir, &target, &cfg).unwrap();
        let moved = state.curve.control_points()[first] - x0[first];
        assert!((moved - d * expected).norm() <= 1e-12 * d.norm().max(1.0), "{moved} {expected}");
    }

    #[test]
    fn blocked_point_stops_before_contact() {
        let g = star(6, 0.4);
        let cfg = FitConfig::default();
        let (target, mut state) = setup(&g, &cfg);
        // push every control point straight through the origin
        let dir: Vec<Vec2> = state.curve.control_points().iter().map(|p| -p * 2.0).collect();
        let mut cfg2 = cfg.clone();
        cfg2.w = 0.0;
        let mut quad = Quadratic::assemble(&state, &cfg2);
        // make every direction a descent direction with a flat model
        quad.b = &quad.h * stack(state.curve.control_points()) - stack(&dir);
        apply_step(&mut state, &quad, &dir, &target, &cfg2).unwrap();
        check_constraints(&state.curve, &target).unwrap();
    }

    #[test]
    fn budget_guards() {
        let cfg = FitConfig::default();
        let (target, mut state) = setup(&star(5, 0.5), &cfg);
        let over = FitConfig {
            n_total: state.curve.len() - 1,
            n_init: 4,
            ..cfg.clone()
        };
        assert_eq!(add_control_points(&mut state, &target, &over), 0);
        let long = FitConfig {
            l_min: 1e3,
            ..cfg.clone()
        };
        assert_eq!(add_control_points(&mut state, &target, &long), 0);
        let n = state.curve.len();
        let tight = FitConfig {
            n_total: n + 2,
            ..cfg.clone()
        };
        assert_eq!(add_control_points(&mut state, &target, &tight), 2);
        assert_eq!(state.curve.len(), n + 2);
    }

    #[test]
    fn insertion_preserves_geometry() {
        let cfg = FitConfig::default();
        let (target, mut state) = setup(&star(7, 0.6), &cfg);
        let before = state.curve.clone();
        let added = add_control_points(&mut state, &target, &cfg);
        assert_eq!(added, 9);
        for i in 0..2000 {
            let u = i as f64 / 2000.0;
            assert!((before.point(u) - state.curve.point(u)).norm() <= 1e-10);
        }
        let e0 = energy_of(&before, &state.correspondences, state.epsilon, &cfg).total;
        let e1 = evaluate_energy(&state, &cfg).total;
        assert!((e0 - e1).abs() <= 1e-9 * e0.max(1.0));
    }
}
