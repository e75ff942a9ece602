use super::{bbox2, cross2, signed_area2, Vec2};
use crate::{Error, Result};

/// A closed planar polygon with counter-clockwise orientation.
///
/// The closing edge from the last vertex back to the first is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon2 {
    vertices: Vec<Vec2>,
}

impl Polygon2 {
    /// Builds a polygon, reversing the vertex order if it is clockwise.
    pub fn new(mut vertices: Vec<Vec2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(Error::InvalidArgument("non-finite polygon vertex".into()));
        }
        if signed_area2(&vertices) < 0.0 {
            vertices.reverse();
        }
        Ok(Self { vertices })
    }

    /// Regular `n`-gon with its first vertex on the positive x axis.
    pub fn regular(n: usize, radius: f64, center: Vec2) -> Result<Self> {
        Self::new(
            (0..n)
                .map(|i| {
                    let a = std::f64::consts::TAU * i as f64 / n as f64;
                    center + Vec2::new(a.cos(), a.sin()) * radius
                })
                .collect(),
        )
    }

    /// Star with `points` tips at `outer` and notches at `inner`, each edge
    /// split into `per_edge` pieces.
    pub fn star(points: usize, outer: f64, inner: f64, per_edge: usize, center: Vec2) -> Result<Self> {
        let corners: Vec<Vec2> = (0..2 * points)
            .map(|i| {
                let a = std::f64::consts::PI * i as f64 / points as f64;
                let r = if i % 2 == 0 { outer } else { inner };
                center + Vec2::new(a.cos(), a.sin()) * r
            })
            .collect();
        let per_edge = per_edge.max(1);
        let n = corners.len();
        let mut vertices = Vec::with_capacity(n * per_edge);
        for i in 0..n {
            let (a, b) = (corners[i], corners[(i + 1) % n]);
            for k in 0..per_edge {
                vertices.push(a.lerp(&b, k as f64 / per_edge as f64));
            }
        }
        Self::new(vertices)
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

    pub fn edge(&self, i: usize) -> (Vec2, Vec2) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        (0..self.len()).map(move |i| self.edge(i))
    }

    pub fn area(&self) -> f64 {
        0.5 * signed_area2(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| (b - a).norm()).sum()
    }

    pub fn centroid(&self) -> Vec2 {
        let n = self.len();
        let mut acc = Vec2::zeros();
        let mut a2 = 0.0;
        for i in 0..n {
            let (p, q) = self.edge(i);
            let c = cross2(p, q);
            acc += (p + q) * c;
            a2 += c;
        }
        if a2.abs() < 1e-300 {
            self.vertices.iter().sum::<Vec2>() / n as f64
        } else {
            acc / (3.0 * a2)
        }
    }

    pub fn bbox_diagonal(&self) -> f64 {
        super::bbox_diagonal2(&self.vertices)
    }

    pub fn translated(&self, offset: Vec2) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| v + offset).collect(),
        }
    }

    /// Rotates the vertex list so that `start` becomes vertex 0.
    pub fn rotated_to(&self, start: usize) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.rotate_left(start % self.len());
        Self { vertices }
    }

    /// Drops vertices lying on the segment between their neighbours
    /// (within `tol` perpendicular distance) and exact duplicates.
    pub fn merge_collinear(&self, tol: f64) -> Self {
        let mut v = self.vertices.clone();
        loop {
            let n = v.len();
            if n <= 3 {
                break;
            }
            let mut keep = Vec::with_capacity(n);
            let mut changed = false;
            for i in 0..n {
                let prev = if keep.is_empty() {
                    v[(i + n - 1) % n]
                } else {
                    *keep.last().unwrap()
                };
                let next = v[(i + 1) % n];
                let cur = v[i];
                let dup = (cur - prev).norm() <= tol;
                let chord = next - prev;
                let len = chord.norm();
                let collinear = len > 0.0
                    && (cross2(chord, cur - prev) / len).abs() <= tol
                    && (cur - prev).dot(&chord) >= 0.0
                    && (cur - next).dot(&-chord) >= 0.0;
                if (dup || collinear) && n - (i - keep.len()) > 3 {
                    changed = true;
                } else {
                    keep.push(cur);
                }
            }
            v = keep;
            if !changed {
                break;
            }
        }
        Self { vertices: v }
    }

    /// Points spaced uniformly by arc length, starting at vertex 0.
    /// Returns the points and their arc-length fractions in `[0, 1)`.
    pub fn sample_uniform(&self, count: usize) -> (Vec<Vec2>, Vec<f64>) {
        let total = self.perimeter();
        let mut pts = Vec::with_capacity(count);
        let mut params = Vec::with_capacity(count);
        let mut edge = 0;
        let mut edge_start = 0.0;
        let mut edge_len = (self.edge(0).1 - self.edge(0).0).norm();
        for k in 0..count {
            let s = total * k as f64 / count as f64;
            while edge_start + edge_len < s && edge + 1 < self.len() {
                edge_start += edge_len;
                edge += 1;
                let (a, b) = self.edge(edge);
                edge_len = (b - a).norm();
            }
            let (a, b) = self.edge(edge);
            let t = if edge_len > 0.0 {
                ((s - edge_start) / edge_len).clamp(0.0, 1.0)
            } else {
                0.0
            };
            pts.push(a + (b - a) * t);
            params.push(s / total);
        }
        (pts, params)
    }

    /// Closest distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Vec2) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Reports whether any pair of non-adjacent edges intersect.
    pub fn is_simple(&self) -> bool {
        let n = self.len();
        let grid = super::EdgeGrid::from_closed(&self.vertices);
        for i in 0..n {
            let (a, b) = self.edge(i);
            let mut bad = false;
            grid.for_each_candidate(a, b, |j| {
                if bad {
                    return;
                }
                let adjacent = j == i || (j + 1) % n == i || (i + 1) % n == j;
                if adjacent {
                    return;
                }
                let (c, d) = self.edge(j);
                if proper_intersection(a, b, c, d) {
                    bad = true;
                }
            });
            if bad {
                return false;
            }
        }
        true
    }
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (a + ab * t - p).norm()
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    cross2(b - a, c - a)
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test; touching counts as intersecting.
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// Strict crossing of two segments (interiors cross transversally).
fn proper_intersection(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Even-odd membership with boundary points classified as inside.
pub fn point_in_polygon(poly: &Polygon2, p: Vec2) -> bool {
    let scale = poly.bbox_diagonal().max(1.0);
    let tol = 1e-12 * scale;
    let mut inside = false;
    for (a, b) in poly.edges() {
        if point_segment_distance(p, a, b) <= tol {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if x > p.x {
                inside = !inside;
            }
        }
    }
    inside
}

/// A polygon with a horizontal band index for fast membership queries
/// and line crossing enumeration.
#[derive(Debug, Clone)]
pub struct IndexedPolygon {
    vertices: Vec<Vec2>,
    y_min: f64,
    band_height: f64,
    bands: Vec<Vec<u32>>,
    lo: Vec2,
    hi: Vec2,
}

impl IndexedPolygon {
    pub fn new(vertices: Vec<Vec2>) -> Self {
        let n = vertices.len();
        let (lo, hi) = bbox2(&vertices);
        let band_count = (n / 4).clamp(1, 1024);
        let height = ((hi.y - lo.y) / band_count as f64).max(1e-300);
        let mut bands = vec![Vec::new(); band_count];
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let y0 = a.y.min(b.y);
            let y1 = a.y.max(b.y);
            let k0 = (((y0 - lo.y) / height) as usize).min(band_count - 1);
            let k1 = (((y1 - lo.y) / height) as usize).min(band_count - 1);
            for band in &mut bands[k0..=k1] {
                band.push(i as u32);
            }
        }
        Self {
            vertices,
            y_min: lo.y,
            band_height: height,
            bands,
            lo,
            hi,
        }
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn bounds(&self) -> (Vec2, Vec2) {
        (self.lo, self.hi)
    }

    /// Even-odd membership; boundary points count as inside.
    pub fn contains(&self, p: Vec2) -> bool {
        if p.x < self.lo.x || p.x > self.hi.x || p.y < self.lo.y || p.y > self.hi.y {
            return false;
        }
        let n = self.vertices.len();
        let k = (((p.y - self.y_min) / self.band_height) as usize).min(self.bands.len() - 1);
        let mut inside = false;
        for &i in &self.bands[k] {
            let a = self.vertices[i as usize];
            let b = self.vertices[(i as usize + 1) % n];
            if point_segment_distance(p, a, b) <= 1e-12 {
                return true;
            }
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if x > p.x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}
