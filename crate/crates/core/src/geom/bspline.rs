use super::{cross2, perp, Vec2};
use crate::{Error, Result};

const MAX_DEGREE: usize = 5;

/// A closed (periodic) planar B-spline over the parameter interval `[0, 1)`.
///
/// `knots` holds one breakpoint per control point, starting at 0; the knot
/// sequence is extended periodically with `t[j + n] = t[j] + 1`. Basis function
/// `j` is supported on `[t[j], t[j + degree + 1]]` and weights control point
/// `j mod n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedBSpline2 {
    degree: usize,
    knots: Vec<f64>,
    control_points: Vec<Vec2>,
}

/// Non-zero basis functions (and derivatives) at one parameter.
#[derive(Debug, Clone, Copy)]
pub struct BasisDerivs {
    /// Index of the knot span containing the parameter.
    pub span: usize,
    /// Periodic index of the first non-zero basis function (`span - degree`).
    pub first: isize,
    /// `values[d][r]` is the `d`-th derivative of basis `first + r`.
    pub values: [[f64; MAX_DEGREE + 1]; 3],
    pub degree: usize,
}

impl BasisDerivs {
    /// Control point index (in `0..n`) weighted by entry `r`.
    #[inline]
    pub fn control_index(&self, r: usize, n: usize) -> usize {
        (self.first + r as isize).rem_euclid(n as isize) as usize
    }
}

/// Local Frenet data of a planar curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frenet {
    pub tangent: Vec2,
    /// Unit normal pointing towards the curvature center.
    pub normal: Vec2,
    /// Curvature radius; `f64::INFINITY` where the curvature vanishes.
    pub radius: f64,
}

impl Frenet {
    pub fn is_flat(&self) -> bool {
        self.radius.is_infinite()
    }
}

impl ClosedBSpline2 {
    pub fn new(degree: usize, knots: Vec<f64>, control_points: Vec<Vec2>) -> Result<Self> {
        let n = control_points.len();
        if degree == 0 || degree > MAX_DEGREE {
            return Err(Error::DegenerateCurve(format!("unsupported degree {degree}")));
        }
        if n < degree + 1 {
            return Err(Error::DegenerateCurve(format!(
                "{n} control points for degree {degree}"
            )));
        }
        if knots.len() != n {
            return Err(Error::DegenerateCurve(format!(
                "{} knots for {n} control points",
                knots.len()
            )));
        }
        if knots[0] != 0.0 || knots[n - 1] >= 1.0 || knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::DegenerateCurve(
                "knots must be nondecreasing in [0, 1) and start at 0".into(),
            ));
        }
        let mut run = 1;
        for w in knots.windows(2) {
            run = if w[0] == w[1] { run + 1 } else { 1 };
            if run > degree {
                return Err(Error::MultiplicityOverflow(w[0]));
            }
        }
        if control_points
            .iter()
            .any(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(Error::DegenerateCurve("non-finite control point".into()));
        }
        Ok(Self {
            degree,
            knots,
            control_points,
        })
    }

    /// Uniform periodic spline with knots `j / n`.
    pub fn uniform(degree: usize, control_points: Vec<Vec2>) -> Result<Self> {
        let n = control_points.len();
        let knots = (0..n).map(|j| j as f64 / n as f64).collect();
        Self::new(degree, knots, control_points)
    }

    /// Uniform cubic approximating a circle: control points on a regular
    /// `n`-gon scaled so the curve passes through the circle at every knot.
    pub fn circle(center: Vec2, radius: f64, n: usize) -> Result<Self> {
        let step = std::f64::consts::TAU / n as f64;
        let scaled = radius * 6.0 / (4.0 + 2.0 * step.cos());
        let points = (0..n)
            .map(|j| {
                let a = step * j as f64;
                center + Vec2::new(a.cos(), a.sin()) * scaled
            })
            .collect();
        Self::uniform(3, points)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn control_points(&self) -> &[Vec2] {
        &self.control_points
    }

    pub fn len(&self) -> usize {
        self.control_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.control_points.is_empty()
    }

    /// Same knots, new control points.
    pub fn with_control_points(&self, control_points: Vec<Vec2>) -> Self {
        assert_eq!(control_points.len(), self.control_points.len());
        Self {
            degree: self.degree,
            knots: self.knots.clone(),
            control_points,
        }
    }

    pub fn translated(&self, offset: Vec2) -> Self {
        self.with_control_points(self.control_points.iter().map(|p| p + offset).collect())
    }

    /// Extended periodic knot `t[j]` for any integer `j`.
    #[inline]
    pub fn knot(&self, j: isize) -> f64 {
        let n = self.knots.len() as isize;
        self.knots[j.rem_euclid(n) as usize] + j.div_euclid(n) as f64
    }

    /// Parameter interval `[t[k], t[k+1]]` of span `k`.
    pub fn span_bounds(&self, k: usize) -> (f64, f64) {
        (self.knot(k as isize), self.knot(k as isize + 1))
    }

    /// Span index containing `u` (wrapped into `[0, 1)`).
    pub fn find_span(&self, u: f64) -> usize {
        let u = wrap(u);
        // largest k with knots[k] <= u; knots[0] == 0 so k exists
        self.knots.partition_point(|&t| t <= u).saturating_sub(1)
    }

    /// Non-zero basis functions and their first `nder` derivatives at `u`.
    pub fn basis(&self, u: f64, nder: usize) -> BasisDerivs {
        let p = self.degree;
        let u = wrap(u);
        let k = self.find_span(u);
        let ki = k as isize;
        let mut ndu = [[0.0f64; MAX_DEGREE + 1]; MAX_DEGREE + 1];
        let mut left = [0.0f64; MAX_DEGREE + 1];
        let mut right = [0.0f64; MAX_DEGREE + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = u - self.knot(ki + 1 - j as isize);
            right[j] = self.knot(ki + j as isize) - u;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = if ndu[j][r] != 0.0 { ndu[r][j - 1] / ndu[j][r] } else { 0.0 };
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        let mut ders = [[0.0f64; MAX_DEGREE + 1]; 3];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let nd = nder.min(2).min(p);
        let mut a = [[0.0f64; MAX_DEGREE + 1]; 2];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for kk in 1..=nd {
                let mut d = 0.0;
                let rk = r as isize - kk as isize;
                let pk = p - kk;
                if r >= kk {
                    let den = ndu[pk + 1][rk as usize];
                    a[s2][0] = if den != 0.0 { a[s1][0] / den } else { 0.0 };
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if r as isize - 1 <= pk as isize { kk - 1 } else { p - r };
                for j in j1..=j2 {
                    let idx = (rk + j as isize) as usize;
                    let den = ndu[pk + 1][idx];
                    a[s2][j] = if den != 0.0 { (a[s1][j] - a[s1][j - 1]) / den } else { 0.0 };
                    d += a[s2][j] * ndu[idx][pk];
                }
                if r <= pk {
                    let den = ndu[pk + 1][r];
                    a[s2][kk] = if den != 0.0 { -a[s1][kk - 1] / den } else { 0.0 };
                    d += a[s2][kk] * ndu[r][pk];
                }
                ders[kk][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut fac = p as f64;
        for kk in 1..=nd {
            for j in 0..=p {
                ders[kk][j] *= fac;
            }
            fac *= (p - kk) as f64;
        }
        BasisDerivs {
            span: k,
            first: ki - p as isize,
            values: ders,
            degree: p,
        }
    }

    /// Position (`order = 0`) or derivative (`order = 1, 2`) at `u`.
    pub fn eval(&self, u: f64, order: usize) -> Result<Vec2> {
        if order > 2 {
            return Err(Error::InvalidOrder(order));
        }
        Ok(self.eval_unchecked(u, order))
    }

    pub(crate) fn eval_unchecked(&self, u: f64, order: usize) -> Vec2 {
        let b = self.basis(u, order);
        if order > self.degree {
            return Vec2::zeros();
        }
        let n = self.len();
        (0..=self.degree)
            .map(|r| self.control_points[b.control_index(r, n)] * b.values[order][r])
            .sum()
    }

    pub fn point(&self, u: f64) -> Vec2 {
        self.eval_unchecked(u, 0)
    }

    /// Position, first and second derivative at once.
    pub fn point_and_derivs(&self, u: f64) -> [Vec2; 3] {
        let b = self.basis(u, 2);
        let n = self.len();
        let mut out = [Vec2::zeros(); 3];
        for r in 0..=self.degree {
            let p = self.control_points[b.control_index(r, n)];
            for (d, o) in out.iter_mut().enumerate() {
                *o += p * b.values[d][r];
            }
        }
        out
    }

    pub fn frenet(&self, u: f64) -> Result<Frenet> {
        let [c, d1, d2] = self.point_and_derivs(u);
        frenet_from_derivs(d1, d2, self.scale() + c.norm()).ok_or(Error::SingularParameter(u))
    }

    /// Characteristic length of the control polygon (used for tolerances).
    pub fn scale(&self) -> f64 {
        super::bbox_diagonal2(&self.control_points).max(1e-300)
    }

    /// Inserts a knot at `u` without changing the curve geometry.
    pub fn insert_knot(&self, u: f64) -> Result<Self> {
        let u = wrap(u);
        let p = self.degree;
        let n = self.len();
        let mult = self.knots.iter().filter(|&&t| t == u).count();
        if mult + 1 > p {
            return Err(Error::MultiplicityOverflow(u));
        }
        let k = self.find_span(u) as isize;
        let start = k - p as isize + 1;
        let m = n as isize + 1;
        let cp = |i: isize| self.control_points[i.rem_euclid(n as isize) as usize];
        let mut points = Vec::with_capacity(n + 1);
        for j in 0..m {
            let i = start + (j - start).rem_euclid(m);
            let q = if i <= k {
                let ti = self.knot(i);
                let tip = self.knot(i + p as isize);
                let a = (u - ti) / (tip - ti);
                cp(i - 1) * (1.0 - a) + cp(i) * a
            } else {
                cp(i - 1)
            };
            points.push(q);
        }
        let mut knots = self.knots.clone();
        knots.insert(k as usize + 1, u);
        Ok(Self {
            degree: p,
            knots,
            control_points: points,
        })
    }

    /// `count` points at parameters `i / count`.
    pub fn sample(&self, count: usize) -> Vec<Vec2> {
        (0..count)
            .map(|i| self.point(i as f64 / count as f64))
            .collect()
    }

    /// Arc length of span `k` (composite Gauss-Legendre).
    pub fn span_length(&self, k: usize) -> f64 {
        let (a, b) = self.span_bounds(k);
        if b <= a {
            return 0.0;
        }
        const X: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
        const W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let pieces = 8;
        let h = (b - a) / pieces as f64;
        let mut total = 0.0;
        for s in 0..pieces {
            let mid = a + h * (s as f64 + 0.5);
            for (x, w) in X.iter().zip(W) {
                total += w * self.eval_unchecked(mid + 0.5 * h * x, 1).norm() * 0.5 * h;
            }
        }
        total
    }

    /// Parameter of the closest curve point to `p`, refined by Newton's method
    /// from the best of `coarse` samples per span.
    pub fn closest_param(&self, p: Vec2, coarse: usize) -> f64 {
        let n = self.len();
        let mut best_u = 0.0;
        let mut best_d = f64::INFINITY;
        for k in 0..n {
            let (a, b) = self.span_bounds(k);
            if b <= a {
                continue;
            }
            for s in 0..coarse {
                let u = a + (b - a) * s as f64 / coarse as f64;
                let d = (self.point(u) - p).norm_squared();
                if d < best_d {
                    best_d = d;
                    best_u = u;
                }
            }
        }
        self.refine_closest(p, best_u)
    }

    /// Newton refinement of a closest-point parameter.
    pub fn refine_closest(&self, p: Vec2, mut u: f64) -> f64 {
        let mut best_d = (self.point(u) - p).norm_squared();
        for _ in 0..12 {
            let [c, d1, d2] = self.point_and_derivs(u);
            let e = c - p;
            let g = e.dot(&d1);
            let h = d1.norm_squared() + e.dot(&d2);
            if h <= 0.0 {
                break;
            }
            let cand = wrap(u - g / h);
            let dc = (self.point(cand) - p).norm_squared();
            if dc >= best_d {
                break;
            }
            best_d = dc;
            u = cand;
            if (g / h).abs() < 1e-14 {
                break;
            }
        }
        u
    }
}

/// Frenet data from first and second derivatives; `None` when the speed vanishes.
pub(crate) fn frenet_from_derivs(d1: Vec2, d2: Vec2, scale: f64) -> Option<Frenet> {
    let speed = d1.norm();
    if speed <= 1e-12 * scale {
        return None;
    }
    let tangent = d1 / speed;
    let kappa = cross2(d1, d2) / (speed * speed * speed);
    if kappa.abs() * scale < 1e-12 {
        return Some(Frenet {
            tangent,
            normal: perp(tangent),
            radius: f64::INFINITY,
        });
    }
    Some(Frenet {
        tangent,
        normal: perp(tangent) * kappa.signum(),
        radius: 1.0 / kappa.abs(),
    })
}

#[inline]
pub(crate) fn wrap(u: f64) -> f64 {
    let w = u - u.floor();
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}
