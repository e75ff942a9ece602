use super::MaterialState;
use crate::geom::{TriMesh, Vec3};
use crate::{Error, Result};
use std::collections::HashMap;

const BISECTIONS: usize = 16;

/// Kuhn decomposition of the unit cube into six tetrahedra sharing the main
/// diagonal; corner `c` has offset bits `(x, y, z) = (c & 1, c >> 1 & 1, c >> 2)`.
const TETS: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 5, 7],
    [0, 2, 3, 7],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 6, 7],
];

/// Triangulates the boundary of the material by marching tetrahedra over a
/// regular grid of `grid_resolution` cells per unit length.
///
/// Surface vertices are located on grid edges by bisecting the membership
/// test, so flat box faces and cut walls come out exact up to the bisection
/// tolerance. The grid is offset so that no node sits on a box face.
pub fn extract_surface_mesh(material: &MaterialState, grid_resolution: usize) -> Result<TriMesh> {
    if grid_resolution < 16 {
        return Err(Error::InvalidArgument(format!(
            "grid resolution {grid_resolution} below 16"
        )));
    }
    let h = 1.0 / (grid_resolution - 1) as f64;
    let (lo, hi) = material.bounds();
    let origin = lo - Vec3::repeat(0.5 * h);
    let dims: [usize; 3] = std::array::from_fn(|k| ((hi[k] - origin[k]) / h).ceil() as usize + 2);
    let node = |i: usize, j: usize, k: usize| origin + Vec3::new(i as f64, j as f64, k as f64) * h;
    let index = |i: usize, j: usize, k: usize| (k * dims[1] + j) * dims[0] + i;

    let mut inside = vec![false; dims[0] * dims[1] * dims[2]];
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                inside[index(i, j, k)] = material.contains(&node(i, j, k));
            }
        }
    }

    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut edge_vertex: HashMap<(usize, usize), u32> = HashMap::new();
    let mut crossing = |a: usize, pa: Vec3, b: usize, pb: Vec3, vertices: &mut Vec<Vec3>| -> u32 {
        // a inside, b outside
        *edge_vertex.entry((a, b)).or_insert_with(|| {
            let (mut s0, mut s1) = (0.0, 1.0);
            for _ in 0..BISECTIONS {
                let m = 0.5 * (s0 + s1);
                if material.contains(&(pa + (pb - pa) * m)) {
                    s0 = m;
                } else {
                    s1 = m;
                }
            }
            vertices.push(pa + (pb - pa) * (0.5 * (s0 + s1)));
            (vertices.len() - 1) as u32
        })
    };

    for k in 0..dims[2] - 1 {
        for j in 0..dims[1] - 1 {
            for i in 0..dims[0] - 1 {
                let corner = |c: usize| (i + (c & 1), j + (c >> 1 & 1), k + (c >> 2));
                let ids: [usize; 8] = std::array::from_fn(|c| {
                    let (x, y, z) = corner(c);
                    index(x, y, z)
                });
                let flags: [bool; 8] = std::array::from_fn(|c| inside[ids[c]]);
                if flags.iter().all(|&f| f) || flags.iter().all(|&f| !f) {
                    continue;
                }
                let pos: [Vec3; 8] = std::array::from_fn(|c| {
                    let (x, y, z) = corner(c);
                    node(x, y, z)
                });
                for tet in TETS {
                    let ins: Vec<usize> = tet.iter().copied().filter(|&c| flags[c]).collect();
                    let outs: Vec<usize> = tet.iter().copied().filter(|&c| !flags[c]).collect();
                    if ins.is_empty() || outs.is_empty() {
                        continue;
                    }
                    let mut v = |a: usize, b: usize, vs: &mut Vec<Vec3>| {
                        crossing(ids[a], pos[a], ids[b], pos[b], vs)
                    };
                    let mut faces: Vec<[u32; 3]> = Vec::new();
                    match (ins.len(), outs.len()) {
                        (1, 3) => faces.push([
                            v(ins[0], outs[0], &mut vertices),
                            v(ins[0], outs[1], &mut vertices),
                            v(ins[0], outs[2], &mut vertices),
                        ]),
                        (3, 1) => faces.push([
                            v(ins[0], outs[0], &mut vertices),
                            v(ins[1], outs[0], &mut vertices),
                            v(ins[2], outs[0], &mut vertices),
                        ]),
                        _ => {
                            let q = [
                                v(ins[0], outs[0], &mut vertices),
                                v(ins[0], outs[1], &mut vertices),
                                v(ins[1], outs[1], &mut vertices),
                                v(ins[1], outs[0], &mut vertices),
                            ];
                            faces.push([q[0], q[1], q[2]]);
                            faces.push([q[0], q[2], q[3]]);
                        }
                    }
                    let cin: Vec3 = ins.iter().map(|&c| pos[c]).sum::<Vec3>() / ins.len() as f64;
                    let cout: Vec3 = outs.iter().map(|&c| pos[c]).sum::<Vec3>() / outs.len() as f64;
                    let outward = cout - cin;
                    for mut f in faces {
                        let [a, b, c] = f.map(|x| vertices[x as usize]);
                        let n = (b - a).cross(&(c - a));
                        if n.norm() <= 1e-18 {
                            continue;
                        }
                        if n.dot(&outward) < 0.0 {
                            f.swap(1, 2);
                        }
                        triangles.push(f);
                    }
                }
            }
        }
    }
    if triangles.is_empty() {
        return Err(Error::Empty("material has no boundary on the grid"));
    }
    TriMesh::new(vertices, triangles)
}
