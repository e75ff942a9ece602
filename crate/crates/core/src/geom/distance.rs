use super::{TriMesh, Vec3};

/// Closest point to `p` on the triangle `abc`.
pub fn closest_point_on_triangle(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

pub fn point_triangle_distance(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> f64 {
    (p - closest_point_on_triangle(p, a, b, c)).norm()
}

/// Unsigned distance queries against a triangle mesh, with triangles binned
/// into a uniform grid and cells visited in growing shells.
#[derive(Debug, Clone)]
pub struct MeshDistance {
    triangles: Vec<[Vec3; 3]>,
    origin: Vec3,
    cell: f64,
    dims: [usize; 3],
    cells: Vec<Vec<u32>>,
}

impl MeshDistance {
    pub fn new(mesh: &TriMesh) -> Self {
        let triangles: Vec<[Vec3; 3]> = (0..mesh.triangles.len()).map(|t| mesh.triangle(t)).collect();
        let (lo, hi) = mesh.bbox();
        let extent = (hi - lo).max().max(1e-12);
        let per_axis = ((triangles.len() as f64).cbrt().ceil() as usize).clamp(1, 128);
        let cell = extent / per_axis as f64 * 1.000001;
        let dims: [usize; 3] = std::array::from_fn(|k| (((hi[k] - lo[k]) / cell) as usize + 1).max(1));
        let mut grid = Self {
            triangles,
            origin: lo,
            cell,
            dims,
            cells: vec![Vec::new(); dims[0] * dims[1] * dims[2]],
        };
        for (t, tri) in grid.triangles.iter().enumerate() {
            let tlo = tri[0].inf(&tri[1]).inf(&tri[2]);
            let thi = tri[0].sup(&tri[1]).sup(&tri[2]);
            let a = grid.cell_of(&tlo);
            let b = grid.cell_of(&thi);
            for z in a[2]..=b[2] {
                for y in a[1]..=b[1] {
                    for x in a[0]..=b[0] {
                        let i = grid.index(x, y, z);
                        grid.cells[i].push(t as u32);
                    }
                }
            }
        }
        grid
    }

    fn cell_of(&self, p: &Vec3) -> [usize; 3] {
        std::array::from_fn(|k| {
            let c = ((p[k] - self.origin[k]) / self.cell).floor();
            (c.max(0.0) as usize).min(self.dims[k] - 1)
        })
    }

    fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (z * self.dims[1] + y) * self.dims[0] + x
    }

    /// Distance from `p` to the nearest triangle.
    pub fn distance(&self, p: Vec3) -> f64 {
        let home = self.cell_of(&p);
        // lower bound for points outside the grid box
        let outside = {
            let hi = self.origin + Vec3::new(
                self.dims[0] as f64,
                self.dims[1] as f64,
                self.dims[2] as f64,
            ) * self.cell;
            (self.origin - p).sup(&(p - hi)).sup(&Vec3::zeros()).norm()
        };
        let max_ring = *self.dims.iter().max().unwrap();
        let mut best = f64::INFINITY;
        for ring in 0..=max_ring {
            // every cell in this ring is at least (ring - 1) cells from p
            if best <= outside.max(ring.saturating_sub(1) as f64 * self.cell) {
                break;
            }
            self.visit_ring(home, ring, |t| {
                let [a, b, c] = self.triangles[t as usize];
                best = best.min(point_triangle_distance(p, a, b, c));
            });
        }
        best
    }

    fn visit_ring(&self, home: [usize; 3], ring: usize, mut visit: impl FnMut(u32)) {
        let r = ring as isize;
        let lo: [isize; 3] = std::array::from_fn(|k| home[k] as isize - r);
        let hi: [isize; 3] = std::array::from_fn(|k| home[k] as isize + r);
        let clamp = |v: isize, k: usize| v >= 0 && (v as usize) < self.dims[k];
        for z in lo[2]..=hi[2] {
            if !clamp(z, 2) {
                continue;
            }
            for y in lo[1]..=hi[1] {
                if !clamp(y, 1) {
                    continue;
                }
                for x in lo[0]..=hi[0] {
                    if !clamp(x, 0) {
                        continue;
                    }
                    let on_shell = x == lo[0] || x == hi[0] || y == lo[1] || y == hi[1] || z == lo[2] || z == hi[2];
                    if !on_shell {
                        continue;
                    }
                    for &t in &self.cells[self.index(x as usize, y as usize, z as usize)] {
                        visit(t);
                    }
                }
            }
        }
    }
}
