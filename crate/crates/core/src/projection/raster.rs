use super::{BinaryImage, CameraFrame};
use crate::geom::{cross2, TriMesh, Vec2};
use crate::material::{MaterialState, RayCaster};
use crate::{Error, Result};

pub const DEFAULT_DEPTH_SAMPLES: usize = 256;

fn projected_triangles<'a>(
    mesh: &'a TriMesh,
    frame: &'a CameraFrame,
    resolution: usize,
) -> impl Iterator<Item = [Vec2; 3]> + 'a {
    let px: Vec<Vec2> = mesh
        .vertices
        .iter()
        .map(|v| frame.to_pixel(frame.project(v), resolution))
        .collect();
    mesh.triangles.iter().map(move |t| {
        let mut tri = [px[t[0] as usize], px[t[1] as usize], px[t[2] as usize]];
        if cross2(tri[1] - tri[0], tri[2] - tri[0]) < 0.0 {
            tri.swap(1, 2);
        }
        tri
    })
}

fn pixel_range(lo: f64, hi: f64, n: usize) -> std::ops::Range<usize> {
    let a = lo.floor().max(0.0) as usize;
    let b = (hi.ceil().max(0.0) as usize).min(n);
    a.min(n)..b
}

/// Top-left fill convention for a CCW triangle in a y-up pixel frame: an
/// edge owns the centers lying exactly on it when it is a left edge
/// (pointing down) or a top edge (horizontal, pointing left).
#[inline]
fn owns_boundary(a: Vec2, b: Vec2) -> bool {
    let d = b - a;
    d.y < 0.0 || (d.y == 0.0 && d.x < 0.0)
}

/// Pixel set iff its center lies inside the orthographic projection of some
/// triangle.
pub fn rasterize_mesh_area(mesh: &TriMesh, frame: &CameraFrame, resolution: usize) -> Result<BinaryImage> {
    if mesh.triangles.is_empty() {
        return Err(Error::Empty("mesh has no triangles"));
    }
    let mut img = BinaryImage::new(resolution);
    for tri in projected_triangles(mesh, frame, resolution) {
        if cross2(tri[1] - tri[0], tri[2] - tri[0]) == 0.0 {
            continue;
        }
        let lo = tri[0].inf(&tri[1]).inf(&tri[2]);
        let hi = tri[0].sup(&tri[1]).sup(&tri[2]);
        for j in pixel_range(lo.y - 0.5, hi.y - 0.5 + 1.0, resolution) {
            let y = j as f64 + 0.5;
            for i in pixel_range(lo.x - 0.5, hi.x - 0.5 + 1.0, resolution) {
                if img.get(i, j) {
                    continue;
                }
                let p = Vec2::new(i as f64 + 0.5, y);
                let inside = (0..3).all(|k| {
                    let a = tri[k];
                    let b = tri[(k + 1) % 3];
                    let e = cross2(b - a, p - a);
                    e > 0.0 || (e == 0.0 && owns_boundary(a, b))
                });
                if inside {
                    img.set(i, j, true);
                }
            }
        }
    }
    Ok(img)
}

/// Pixel set iff its closed square touches the projection of some triangle.
///
/// The union of set pixel squares therefore contains the whole silhouette,
/// which is what a collision-free cut must enclose.
pub fn rasterize_mesh_conservative(
    mesh: &TriMesh,
    frame: &CameraFrame,
    resolution: usize,
) -> Result<BinaryImage> {
    if mesh.triangles.is_empty() {
        return Err(Error::Empty("mesh has no triangles"));
    }
    let mut img = BinaryImage::new(resolution);
    let slack = 1e-9;
    for tri in projected_triangles(mesh, frame, resolution) {
        let lo = tri[0].inf(&tri[1]).inf(&tri[2]);
        let hi = tri[0].sup(&tri[1]).sup(&tri[2]);
        let flat = cross2(tri[1] - tri[0], tri[2] - tri[0]) == 0.0;
        for j in pixel_range(lo.y - 1.0 - slack, hi.y + slack, resolution) {
            for i in pixel_range(lo.x - 1.0 - slack, hi.x + slack, resolution) {
                if img.get(i, j) {
                    continue;
                }
                let corners = [
                    Vec2::new(i as f64, j as f64),
                    Vec2::new(i as f64 + 1.0, j as f64),
                    Vec2::new(i as f64, j as f64 + 1.0),
                    Vec2::new(i as f64 + 1.0, j as f64 + 1.0),
                ];
                let overlaps = if flat {
                    segment_touches_square(&tri, &corners, slack)
                } else {
                    (0..3).all(|k| {
                        let a = tri[k];
                        let b = tri[(k + 1) % 3];
                        corners
                            .iter()
                            .any(|c| cross2(b - a, c - a) >= -slack * (b - a).norm())
                    })
                };
                if overlaps {
                    img.set(i, j, true);
                }
            }
        }
    }
    Ok(img)
}

fn segment_touches_square(tri: &[Vec2; 3], corners: &[Vec2; 4], slack: f64) -> bool {
    let square = [corners[0], corners[1], corners[3], corners[2]];
    (0..3).any(|k| {
        let a = tri[k];
        let b = tri[(k + 1) % 3];
        let inside = |p: Vec2| {
            p.x >= corners[0].x - slack
                && p.x <= corners[3].x + slack
                && p.y >= corners[0].y - slack
                && p.y <= corners[3].y + slack
        };
        inside(a)
            || inside(b)
            || (0..4).any(|e| {
                crate::geom::segments_intersect(a, b, square[e], square[(e + 1) % 4])
            })
    })
}

/// Pixel set iff its center lies inside the polygon (image-plane coordinates).
pub fn rasterize_polygon(vertices: &[Vec2], frame: &CameraFrame, resolution: usize) -> BinaryImage {
    let poly = crate::geom::IndexedPolygon::new(vertices.to_vec());
    let mut img = BinaryImage::new(resolution);
    for j in 0..resolution {
        for i in 0..resolution {
            let q = frame.from_pixel(Vec2::new(i as f64 + 0.5, j as f64 + 0.5), resolution);
            if poly.contains(q) {
                img.set(i, j, true);
            }
        }
    }
    img
}

/// Pixel set iff one of `depth_samples` evenly spaced points on the pixel's
/// view ray, clipped to the region that can hold material, is inside it.
pub fn rasterize_material_area(
    material: &MaterialState,
    frame: &CameraFrame,
    resolution: usize,
    depth_samples: usize,
) -> Result<BinaryImage> {
    if depth_samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 depth samples, got {depth_samples}"
        )));
    }
    let caster = RayCaster::new(material, frame.view_dir);
    let mut img = BinaryImage::new(resolution);
    for j in 0..resolution {
        for i in 0..resolution {
            let q = frame.from_pixel(Vec2::new(i as f64 + 0.5, j as f64 + 0.5), resolution);
            let origin = frame.lift(q);
            let Some((s0, s1)) = caster.support_span(&origin) else {
                continue;
            };
            let hit = (0..depth_samples).any(|k| {
                let s = s0 + (s1 - s0) * k as f64 / (depth_samples - 1) as f64;
                material.contains(&(origin + frame.view_dir * s))
            });
            if hit {
                img.set(i, j, true);
            }
        }
    }
    Ok(img)
}

/// Limit of [`rasterize_material_area`] for infinitely many depth samples:
/// the pixel is set iff its view ray meets the material in an interval of
/// positive length, computed by exact ray/prism clipping.
pub fn rasterize_material_area_exact(
    material: &MaterialState,
    frame: &CameraFrame,
    resolution: usize,
) -> BinaryImage {
    let caster = RayCaster::new(material, frame.view_dir);
    let mut img = BinaryImage::new(resolution);
    for j in 0..resolution {
        for i in 0..resolution {
            let q = frame.from_pixel(Vec2::new(i as f64 + 0.5, j as f64 + 0.5), resolution);
            if caster.hits(&frame.lift(q)) {
                img.set(i, j, true);
            }
        }
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;
    use crate::projection::{area_mismatch, camera_frame, Viewpoint};

    #[test]
    fn full_cover_triangle() {
        let f = camera_frame(&Viewpoint::new(0.0, 0.0, 2.0).unwrap());
        let s = 10.0;
        let mesh = TriMesh::new(
            vec![Vec3::new(0.0, -s, -s), Vec3::new(0.0, 3.0 * s, -s), Vec3::new(0.0, -s, 3.0 * s)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let img = rasterize_mesh_area(&mesh, &f, 64).unwrap();
        assert_eq!(img.count(), 64 * 64);
    }

    #[test]
    fn cube_area_fraction() {
        let f = camera_frame(&Viewpoint::new(0.0, 0.0, 2.0).unwrap());
        let h = 0.3;
        let mesh = TriMesh::cuboid(Vec3::repeat(-h), Vec3::repeat(h));
        let img = rasterize_mesh_area(&mesh, &f, 256).unwrap();
        let frac = img.count() as f64 / (256.0 * 256.0);
        let expected = (2.0 * h).powi(2) / (2.0 * f.scale).powi(2);
        assert!((frac - expected).abs() / expected < 0.02, "{frac} vs {expected}");
    }

    #[test]
    fn depth_invariance() {
        let f = camera_frame(&Viewpoint::new(0.4, 1.0, 2.0).unwrap());
        let mesh = TriMesh::icosphere(0.3, 2);
        let shifted = mesh.transformed(1.0, f.view_dir * 5.0);
        let behind = mesh.transformed(1.0, -f.view_dir * 7.0);
        let a = rasterize_mesh_area(&mesh, &f, 128).unwrap();
        assert_eq!(a, rasterize_mesh_area(&shifted, &f, 128).unwrap());
        assert_eq!(a, rasterize_mesh_area(&behind, &f, 128).unwrap());
    }

    #[test]
    fn conservative_contains_center_rule() {
        let f = camera_frame(&Viewpoint::new(0.2, 0.7, 2.0).unwrap());
        let mesh = TriMesh::icosphere(0.35, 2);
        let a = rasterize_mesh_area(&mesh, &f, 128).unwrap();
        let c = rasterize_mesh_conservative(&mesh, &f, 128).unwrap();
        assert!(a.is_subset_of(&c));
        assert!(c.count() > a.count());
    }

    fn z_cut(radius: f64) -> crate::material::PrismCut {
        let frame = camera_frame(&Viewpoint::new(std::f64::consts::FRAC_PI_2, 0.0, 2.0).unwrap());
        crate::material::PrismCut::new(
            frame,
            crate::geom::ClosedBSpline2::circle(Vec2::zeros(), radius, 64).unwrap(),
        )
    }

    #[test]
    fn pristine_material_is_box_silhouette() {
        let f = camera_frame(&Viewpoint::new(0.3, 0.8, 2.0).unwrap());
        let m = MaterialState::pristine();
        let cube = TriMesh::cuboid(Vec3::repeat(-0.5), Vec3::repeat(0.5));
        let boxed = rasterize_mesh_area(&cube, &f, 128).unwrap();
        let exact = rasterize_material_area_exact(&m, &f, 128);
        let sampled = rasterize_material_area(&m, &f, 128, DEFAULT_DEPTH_SAMPLES).unwrap();
        assert_eq!(exact, boxed);
        assert_eq!(sampled, boxed);
    }

    #[test]
    fn axial_view_of_prism_cut() {
        let cut = z_cut(0.3);
        let f = *cut.frame();
        let m = MaterialState::pristine().apply_cut_unchecked(cut);
        let res = 256;
        let img = rasterize_material_area(&m, &f, res, 16).unwrap();
        let px_area = img.count() as f64 * f.pixel_size(res).powi(2);
        let exact = std::f64::consts::PI * 0.09;
        assert!((px_area - exact).abs() / exact < 0.02);
        assert_eq!(img, rasterize_material_area_exact(&m, &f, res));
    }

    #[test]
    fn cuts_never_grow_the_image() {
        let f = camera_frame(&Viewpoint::new(0.5, 2.0, 2.0).unwrap());
        let a = MaterialState::pristine();
        let b = a.apply_cut_unchecked(z_cut(0.4));
        let side = camera_frame(&Viewpoint::new(0.0, 1.0, 2.0).unwrap());
        let c = b.apply_cut_unchecked(crate::material::PrismCut::new(
            side,
            crate::geom::ClosedBSpline2::circle(Vec2::new(0.05, 0.0), 0.35, 32).unwrap(),
        ));
        let ia = rasterize_material_area_exact(&a, &f, 128);
        let ib = rasterize_material_area_exact(&b, &f, 128);
        let ic = rasterize_material_area_exact(&c, &f, 128);
        assert!(ib.is_subset_of(&ia) && ic.is_subset_of(&ib));
        assert!(ic.count() < ia.count());
        let sc = rasterize_material_area(&c, &f, 128, DEFAULT_DEPTH_SAMPLES).unwrap();
        assert!(sc.is_subset_of(&ic));
        assert!(area_mismatch(&sc, &ic).unwrap() < 60);
    }

    #[test]
    fn too_few_depth_samples() {
        let f = camera_frame(&Viewpoint::new(0.0, 0.0, 2.0).unwrap());
        assert!(rasterize_material_area(&MaterialState::pristine(), &f, 8, 1).is_err());
    }
}
