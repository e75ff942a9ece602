use super::Vec3;
use crate::{Error, Result};

/// Indexed triangle mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::Empty("mesh has no triangles"));
        }
        let n = vertices.len() as u32;
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&i| i >= n)) {
            return Err(Error::InvalidArgument(format!(
                "triangle {t:?} references a vertex beyond {n}"
            )));
        }
        Ok(Self {
            vertices,
            triangles,
        })
    }

    pub fn bbox(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Length of the bounding-box diagonal.
    pub fn d_bb(&self) -> f64 {
        let (lo, hi) = self.bbox();
        (hi - lo).norm()
    }

    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle(t);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Every undirected edge is shared by exactly two triangles that traverse
    /// it in opposite directions.
    pub fn is_closed_oriented(&self) -> bool {
        use std::collections::HashMap;
        let mut count: HashMap<(u32, u32), i32> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let a = t[k];
                let b = t[(k + 1) % 3];
                if a == b {
                    return false;
                }
                *count.entry((a, b)).or_default() += 1;
            }
        }
        count
            .iter()
            .all(|(&(a, b), &c)| c == 1 && count.get(&(b, a)) == Some(&1))
    }

    /// Applies `p -> p * scale + offset` to every vertex.
    pub fn transformed(&self, scale: f64, offset: Vec3) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| v * scale + offset).collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Merges another mesh into this one.
    pub fn append(&mut self, other: &TriMesh) {
        let base = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles.extend(
            other
                .triangles
                .iter()
                .map(|t| [t[0] + base, t[1] + base, t[2] + base]),
        );
    }

    /// Axis-aligned box with outward-facing triangles.
    pub fn cuboid(lo: Vec3, hi: Vec3) -> Self {
        let v = |x: usize, y: usize, z: usize| {
            Vec3::new(
                if x == 0 { lo.x } else { hi.x },
                if y == 0 { lo.y } else { hi.y },
                if z == 0 { lo.z } else { hi.z },
            )
        };
        let vertices = vec![
            v(0, 0, 0),
            v(1, 0, 0),
            v(1, 1, 0),
            v(0, 1, 0),
            v(0, 0, 1),
            v(1, 0, 1),
            v(1, 1, 1),
            v(0, 1, 1),
        ];
        let triangles = vec![
            [0, 2, 1],
            [0, 3, 2],
            [4, 5, 6],
            [4, 6, 7],
            [0, 1, 5],
            [0, 5, 4],
            [2, 3, 7],
            [2, 7, 6],
            [1, 2, 6],
            [1, 6, 5],
            [0, 4, 7],
            [0, 7, 3],
        ];
        Self {
            vertices,
            triangles,
        }
    }

    /// Icosphere obtained by `subdivisions` rounds of 4:1 splitting.
    pub fn icosphere(radius: f64, subdivisions: usize) -> Self {
        use std::collections::HashMap;
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut vertices: Vec<Vec3> = [
            (-1.0, t, 0.0),
            (1.0, t, 0.0),
            (-1.0, -t, 0.0),
            (1.0, -t, 0.0),
            (0.0, -1.0, t),
            (0.0, 1.0, t),
            (0.0, -1.0, -t),
            (0.0, 1.0, -t),
            (t, 0.0, -1.0),
            (t, 0.0, 1.0),
            (-t, 0.0, -1.0),
            (-t, 0.0, 1.0),
        ]
        .iter()
        .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
        .collect();
        let mut triangles: Vec<[u32; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..subdivisions {
            let mut mid: HashMap<(u32, u32), u32> = HashMap::new();
            let mut midpoint = |a: u32, b: u32, vs: &mut Vec<Vec3>| -> u32 {
                let key = (a.min(b), a.max(b));
                *mid.entry(key).or_insert_with(|| {
                    let m = ((vs[a as usize] + vs[b as usize]) * 0.5).normalize();
                    vs.push(m);
                    (vs.len() - 1) as u32
                })
            };
            let mut next = Vec::with_capacity(triangles.len() * 4);
            for [a, b, c] in triangles {
                let ab = midpoint(a, b, &mut vertices);
                let bc = midpoint(b, c, &mut vertices);
                let ca = midpoint(c, a, &mut vertices);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            triangles = next;
        }
        Self {
            vertices: vertices.into_iter().map(|v| v * radius).collect(),
            triangles,
        }
    }

    /// Icosphere scaled per axis.
    pub fn ellipsoid(radii: Vec3, subdivisions: usize) -> Self {
        let mut m = Self::icosphere(1.0, subdivisions);
        for v in &mut m.vertices {
            *v = v.component_mul(&radii);
        }
        m
    }

    /// Star-shaped genus-0 blob: an icosphere whose radius is modulated by a
    /// few smooth lobes, `r(d) = radius * (1 + amplitude * f(d))` with
    /// `|f| <= 1`.
    pub fn blob(radius: f64, amplitude: f64, subdivisions: usize) -> Self {
        let mut m = Self::icosphere(1.0, subdivisions);
        for v in &mut m.vertices {
            let f = ((3.0 * v.x).sin() * (2.0 * v.y).cos() + (2.5 * v.z + 0.5).sin()) * 0.5;
            *v *= radius * (1.0 + amplitude * f);
        }
        m
    }

    /// Non-watertight test shape: a blob with every 29th face removed and a
    /// detached single-sided fin sticking out of it.
    pub fn perforated_blob(radius: f64, subdivisions: usize) -> Self {
        let blob = Self::blob(radius, 0.25, subdivisions);
        let triangles = blob
            .triangles
            .iter()
            .enumerate()
            .filter(|(k, _)| k % 29 != 7)
            .map(|(_, t)| *t)
            .collect();
        let mut m = Self {
            vertices: blob.vertices,
            triangles,
        };
        let r = radius;
        m.append(&Self {
            vertices: vec![
                Vec3::new(0.2 * r, -0.3 * r, 0.1 * r),
                Vec3::new(1.45 * r, 0.1 * r, 0.3 * r),
                Vec3::new(0.3 * r, 0.4 * r, 0.6 * r),
            ],
            triangles: vec![[0, 1, 2]],
        });
        m
    }

    /// `n` points drawn uniformly by area from the surface.
    pub fn sample_surface(&self, n: usize, rng: &mut impl rand::Rng) -> Vec<Vec3> {
        let mut cumulative = Vec::with_capacity(self.triangles.len());
        let mut total = 0.0;
        for t in 0..self.triangles.len() {
            total += self.triangle_area(t);
            cumulative.push(total);
        }
        (0..n)
            .map(|_| {
                let x = rng.gen::<f64>() * total;
                let t = cumulative.partition_point(|&c| c < x).min(cumulative.len() - 1);
                let [a, b, c] = self.triangle(t);
                let (mut r1, mut r2) = (rng.gen::<f64>(), rng.gen::<f64>());
                if r1 + r2 > 1.0 {
                    r1 = 1.0 - r1;
                    r2 = 1.0 - r2;
                }
                a + (b - a) * r1 + (c - a) * r2
            })
            .collect()
    }

    /// Closed z-aligned cylinder approximated by `segments` facets.
    pub fn cylinder(center_xy: (f64, f64), radius: f64, z0: f64, z1: f64, segments: usize) -> Self {
        let (cx, cy) = center_xy;
        let mut vertices = Vec::with_capacity(2 * segments + 2);
        for z in [z0, z1] {
            for i in 0..segments {
                let a = i as f64 / segments as f64 * std::f64::consts::TAU;
                vertices.push(Vec3::new(cx + radius * a.cos(), cy + radius * a.sin(), z));
            }
        }
        vertices.push(Vec3::new(cx, cy, z0));
        vertices.push(Vec3::new(cx, cy, z1));
        let s = segments as u32;
        let (c0, c1) = (2 * s, 2 * s + 1);
        let mut triangles = Vec::new();
        for i in 0..s {
            let j = (i + 1) % s;
            triangles.push([i, j, s + j]);
            triangles.push([i, s + j, s + i]);
            triangles.push([c0, j, i]);
            triangles.push([c1, s + i, s + j]);
        }
        Self {
            vertices,
            triangles,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_indices_and_empty() {
        assert!(TriMesh::new(vec![Vec3::zeros()], vec![[0, 0, 1]]).is_err());
        assert!(TriMesh::new(vec![Vec3::zeros()], vec![]).is_err());
    }

    #[test]
    fn primitives_are_closed() {
        assert!(TriMesh::cuboid(Vec3::repeat(-0.5), Vec3::repeat(0.5)).is_closed_oriented());
        assert!(TriMesh::icosphere(1.0, 2).is_closed_oriented());
        assert!(TriMesh::cylinder((0.0, 0.0), 0.3, -1.0, -0.5, 24).is_closed_oriented());
    }

    #[test]
    fn blob_is_closed_and_bounded() {
        let m = TriMesh::blob(0.3, 0.25, 3);
        assert!(m.is_closed_oriented());
        assert!(m.vertices.iter().all(|v| v.norm() <= 0.3 * 1.25 + 1e-12 && v.norm() >= 0.3 * 0.75 - 1e-12));
        let e = TriMesh::ellipsoid(Vec3::new(0.4, 0.3, 0.2), 2);
        let (lo, hi) = e.bbox();
        assert!((hi - lo - Vec3::new(0.8, 0.6, 0.4)).norm() < 1e-12);
    }

    #[test]
    fn perforated_blob_is_open() {
        let m = TriMesh::perforated_blob(0.3, 3);
        assert!(!m.is_closed_oriented());
        assert!(m.bbox().1.x > 0.4);
    }

    #[test]
    fn surface_samples_lie_on_faces() {
        use rand::SeedableRng;
        let m = TriMesh::cuboid(Vec3::repeat(-0.5), Vec3::repeat(0.5));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let pts = m.sample_surface(600, &mut rng);
        assert!(pts.iter().all(|p| (p.abs().max() - 0.5).abs() < 1e-12));
        // six equal faces get roughly equal shares
        let top = pts.iter().filter(|p| (p.z - 0.5).abs() < 1e-12).count();
        assert!((60..140).contains(&top), "{top}");
    }

    #[test]
    fn cube_diagonal() {
        let m = TriMesh::cuboid(Vec3::repeat(-0.5), Vec3::repeat(0.5));
        assert!((m.d_bb() - 3f64.sqrt()).abs() < 1e-15);
    }
}
