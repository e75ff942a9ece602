use super::{cross2, point_segment_distance, Vec2};
use crate::{Error, Result};

/// A strictly convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Vec2>,
}

impl ConvexPolygon {
    /// Wraps vertices that are already in strictly convex CCW order.
    pub fn from_ccw(vertices: Vec<Vec2>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::DegenerateHull);
        }
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if cross2(b - a, c - b) <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "vertex {} is not a strictly convex CCW turn",
                    (i + 1) % n
                )));
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Membership in the closed region.
    pub fn contains(&self, p: Vec2) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            cross2(b - a, p - a) >= -1e-12 * (b - a).norm()
        })
    }

    /// Distance from `p` to the closed region (zero inside).
    pub fn region_distance(&self, p: Vec2) -> f64 {
        if self.contains(p) {
            return 0.0;
        }
        let n = self.vertices.len();
        (0..n)
            .map(|i| point_segment_distance(p, self.vertices[i], self.vertices[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

}

/// Monotone-chain convex hull; collinear points are dropped.
pub fn convex_hull(points: &[Vec2]) -> Result<ConvexPolygon> {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return Err(Error::DegenerateHull);
    }
    let mut lower: Vec<Vec2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2
            && cross2(lower[lower.len() - 1] - lower[lower.len() - 2], p - lower[lower.len() - 1])
                <= 0.0
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Vec2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2
            && cross2(upper[upper.len() - 1] - upper[upper.len() - 2], p - upper[upper.len() - 1])
                <= 0.0
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Err(Error::DegenerateHull);
    }
    Ok(ConvexPolygon { vertices: lower })
}

/// Symmetric Hausdorff distance between two convex regions.
///
/// The distance to a convex region is a convex function, so the supremum
/// over the other region is attained at one of its vertices.
pub fn hausdorff_convex(a: &ConvexPolygon, b: &ConvexPolygon) -> f64 {
    let ab = a
        .vertices
        .iter()
        .map(|&p| b.region_distance(p))
        .fold(0.0, f64::max);
    let ba = b
        .vertices
        .iter()
        .map(|&p| a.region_distance(p))
        .fold(0.0, f64::max);
    ab.max(ba)
}

/// Greedy vertex removal: repeatedly drop the vertex whose removal keeps the
/// Hausdorff distance to the original hull smallest, while that distance stays
/// below `beta` and more than `min_vertices` vertices remain.
///
/// Every candidate lies inside the original hull, so the distance is the
/// largest gap between a removed original vertex and the edge that spans it.
pub fn simplify_convex_hull(hull: &ConvexPolygon, beta: f64, min_vertices: usize) -> ConvexPolygon {
    let orig = &hull.vertices;
    let m = orig.len();
    // span error of the edge from original vertex a to original vertex b
    let span = |a: usize, b: usize| -> f64 {
        let (p, q) = (orig[a], orig[b]);
        let tol = -1e-12 * (q - p).norm();
        let mut k = (a + 1) % m;
        let mut worst = 0.0f64;
        while k != b {
            let v = orig[k];
            if cross2(q - p, v - p) < tol {
                worst = worst.max(point_segment_distance(v, p, q));
            }
            k = (k + 1) % m;
        }
        worst
    };
    let mut kept: Vec<usize> = (0..m).collect();
    let mut edge_err = vec![0.0; m];
    while kept.len() > min_vertices.max(3) {
        let n = kept.len();
        let mut top: Vec<(f64, usize)> = edge_err.iter().copied().zip(0..n).collect();
        top.sort_by(|a, b| b.0.total_cmp(&a.0));
        top.truncate(3);
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..n {
            let (prev, next, after) = ((j + n - 1) % n, (j + 1) % n, (j + 2) % n);
            let (a, b) = (orig[kept[prev]], orig[kept[next]]);
            let before = orig[kept[(j + n - 2) % n]];
            let beyond = orig[kept[after]];
            if n > 3 && (cross2(a - before, b - a) <= 0.0 || cross2(b - a, beyond - b) <= 0.0) {
                continue;
            }
            let merged = span(kept[prev], kept[next]);
            let rest = top
                .iter()
                .find(|&&(_, e)| e != prev && e != j)
                .map_or(0.0, |&(v, _)| v);
            let d = merged.max(rest);
            if best.is_none_or(|(_, bd, _)| d < bd) {
                best = Some((j, d, merged));
            }
        }
        match best {
            Some((j, d, merged)) if d < beta => {
                let prev = (j + n - 1) % n;
                edge_err[prev] = merged;
                kept.remove(j);
                edge_err.remove(j);
            }
            _ => break,
        }
    }
    ConvexPolygon {
        vertices: kept.into_iter().map(|k| orig[k]).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(h: f64) -> ConvexPolygon {
        ConvexPolygon::from_ccw(vec![
            Vec2::new(-h, -h),
            Vec2::new(h, -h),
            Vec2::new(h, h),
            Vec2::new(-h, h),
        ])
        .unwrap()
    }

    #[test]
    fn square_with_center() {
        let pts = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.5, 0.5),
        ];
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.len(), 4);
        assert!(!h.vertices().contains(&Vec2::new(0.5, 0.5)));
    }

    #[test]
    fn circle_points_all_kept_ccw() {
        let pts: Vec<Vec2> = (0..17)
            .map(|i| {
                let t = i as f64 / 17.0 * std::f64::consts::TAU;
                Vec2::new(t.cos(), t.sin())
            })
            .collect();
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.len(), 17);
        assert!(super::super::signed_area2(h.vertices()) > 0.0);
    }

    #[test]
    fn collinear_is_degenerate() {
        let pts: Vec<Vec2> = (0..5).map(|i| Vec2::new(i as f64, 2.0 * i as f64)).collect();
        assert!(matches!(convex_hull(&pts), Err(Error::DegenerateHull)));
    }

    #[test]
    fn hausdorff_identical_is_zero() {
        assert_eq!(hausdorff_convex(&square(1.0), &square(1.0)), 0.0);
    }

    #[test]
    fn hausdorff_corner_deleted() {
        let sq = ConvexPolygon::from_ccw(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap();
        let tri = ConvexPolygon::from_ccw(vec![
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap();
        assert!((hausdorff_convex(&sq, &tri) - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn hausdorff_nested_squares_matches_sampling() {
        let outer = square(1.0);
        let inner = square(0.5);
        let h = hausdorff_convex(&outer, &inner);
        // dense sampling oracle over the outer region
        let mut worst: f64 = 0.0;
        let n = 400;
        for i in 0..=n {
            for j in 0..=n {
                let p = Vec2::new(-1.0 + 2.0 * i as f64 / n as f64, -1.0 + 2.0 * j as f64 / n as f64);
                let dx = (p.x.abs() - 0.5).max(0.0);
                let dy = (p.y.abs() - 0.5).max(0.0);
                worst = worst.max((dx * dx + dy * dy).sqrt());
            }
        }
        assert!((h - worst).abs() < 1e-9);
        assert!((h - 0.5 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn simplify_absorbs_small_bump() {
        let d_bb = 2.0 * 2f64.sqrt();
        let hull = convex_hull(&[
            Vec2::new(-1.0, -1.0),
            Vec2::new(0.0, -1.0 - 0.001 * d_bb),
            Vec2::new(1.0, -1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
        ])
        .unwrap();
        assert_eq!(hull.len(), 5);
        let s = simplify_convex_hull(&hull, 0.02 * d_bb, 3);
        assert_eq!(s.len(), 4);
    }

    #[test]
    fn simplify_zero_beta_is_identity() {
        let hex: Vec<Vec2> = (0..6)
            .map(|i| {
                let t = i as f64 / 6.0 * std::f64::consts::TAU;
                Vec2::new(t.cos(), t.sin())
            })
            .collect();
        let hull = ConvexPolygon::from_ccw(hex).unwrap();
        assert_eq!(simplify_convex_hull(&hull, 0.0, 3), hull);
    }

    fn brute_force(hull: &ConvexPolygon, beta: f64, min_vertices: usize) -> ConvexPolygon {
        let mut current = hull.clone();
        while current.len() > min_vertices.max(3) {
            let mut best: Option<(usize, f64)> = None;
            for j in 0..current.len() {
                let mut v = current.vertices.clone();
                v.remove(j);
                let Ok(candidate) = ConvexPolygon::from_ccw(v) else {
                    continue;
                };
                let d = hausdorff_convex(hull, &candidate);
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
            match best {
                Some((j, d)) if d < beta => {
                    let mut v = current.vertices.clone();
                    v.remove(j);
                    current = ConvexPolygon { vertices: v };
                }
                _ => break,
            }
        }
        current
    }

    #[test]
    fn greedy_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let pts: Vec<Vec2> = (0..rng.gen_range(5..60))
                .map(|_| {
                    let t = rng.gen_range(0.0..std::f64::consts::TAU);
                    let r = rng.gen_range(0.8..1.0);
                    Vec2::new(r * t.cos(), 0.6 * r * t.sin())
                })
                .collect();
            let hull = convex_hull(&pts).unwrap();
            let beta = rng.gen_range(0.0..0.2);
            let fast = simplify_convex_hull(&hull, beta, 4);
            let slow = brute_force(&hull, beta, 4);
            assert_eq!(fast.vertices(), slow.vertices());
            assert!(hausdorff_convex(&hull, &fast) < beta.max(1e-300) || fast == hull);
        }
    }
}
