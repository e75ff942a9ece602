//! Foundational geometry shared by every stage of the planner.

mod bspline;
mod ccd;
mod distance;
mod grid;
mod hull;
mod mesh;
mod polygon;

pub use bspline::{BasisDerivs, ClosedBSpline2, Frenet};
pub use ccd::{ccd_max_step, ccd_max_step_parallel};
pub use distance::{closest_point_on_triangle, point_triangle_distance, MeshDistance};
pub use grid::EdgeGrid;
pub use hull::{convex_hull, hausdorff_convex, simplify_convex_hull, ConvexPolygon};
pub use mesh::TriMesh;
pub use polygon::{
    point_segment_distance, point_in_polygon, segments_intersect, IndexedPolygon, Polygon2,
};

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;

/// z-component of the 2D cross product.
#[inline]
pub fn cross2(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Counter-clockwise rotation by 90 degrees.
#[inline]
pub fn perp(a: Vec2) -> Vec2 {
    Vec2::new(-a.y, a.x)
}

/// Twice the signed area of a closed polyline (positive when CCW).
pub fn signed_area2(points: &[Vec2]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| cross2(points[i], points[(i + 1) % n]))
        .sum()
}

/// Diagonal length of the axis-aligned bounding box of a 2D point set.
pub fn bbox_diagonal2(points: &[Vec2]) -> f64 {
    let (lo, hi) = bbox2(points);
    (hi - lo).norm()
}

pub fn bbox2(points: &[Vec2]) -> (Vec2, Vec2) {
    let mut lo = Vec2::repeat(f64::INFINITY);
    let mut hi = Vec2::repeat(f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (lo, hi)
}
