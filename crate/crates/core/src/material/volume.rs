use super::{MaterialState, BOX_HALF};
use crate::geom::{TriMesh, Vec3};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CHUNK: usize = 4096;
const VOXEL_RESOLUTION: usize = 256;

/// Monte-Carlo volume of the material inside the unit box and its standard
/// error `sqrt(p (1 - p) / n)`.
///
/// Samples are drawn in fixed-size chunks, each from its own stream derived
/// from `seed`, so the result depends only on `(seed, sample_budget)`.
pub fn estimate_volume(material: &MaterialState, sample_budget: usize, seed: u64) -> Result<(f64, f64)> {
    if sample_budget < 1000 {
        return Err(Error::InvalidArgument(format!(
            "volume sample budget {sample_budget} below 1000"
        )));
    }
    let mut hits = 0usize;
    let mut done = 0usize;
    let mut chunk = 0u64;
    while done < sample_budget {
        let take = CHUNK.min(sample_budget - done);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk);
        for _ in 0..take {
            let p = Vec3::new(
                rng.gen_range(-BOX_HALF..BOX_HALF),
                rng.gen_range(-BOX_HALF..BOX_HALF),
                rng.gen_range(-BOX_HALF..BOX_HALF),
            );
            hits += material.contains(&p) as usize;
        }
        done += take;
        chunk += 1;
    }
    let n = sample_budget as f64;
    let p = hits as f64 / n;
    Ok((p, (p * (1.0 - p) / n).sqrt()))
}

/// Enclosed volume of a mesh.
///
/// Closed, consistently oriented meshes use the divergence theorem; anything
/// else falls back to counting voxel centers inside by ray parity on a
/// 256^3 grid over the mesh bounds.
pub fn mesh_volume(mesh: &TriMesh) -> f64 {
    if mesh.is_closed_oriented() {
        let six_v: f64 = (0..mesh.triangles.len())
            .map(|t| {
                let [a, b, c] = mesh.triangle(t);
                a.dot(&b.cross(&c))
            })
            .sum();
        (six_v / 6.0).abs()
    } else {
        voxel_volume(mesh, VOXEL_RESOLUTION)
    }
}

pub(crate) fn voxel_volume(mesh: &TriMesh, res: usize) -> f64 {
    let (lo, hi) = mesh.bbox();
    let size = hi - lo;
    if size.x <= 0.0 || size.y <= 0.0 || size.z <= 0.0 {
        return 0.0;
    }
    let h = size / res as f64;
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); res * res];
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.triangle(t);
        let xmin = a.x.min(b.x).min(c.x);
        let xmax = a.x.max(b.x).max(c.x);
        let ymin = a.y.min(b.y).min(c.y);
        let ymax = a.y.max(b.y).max(c.y);
        let i0 = (((xmin - lo.x) / h.x - 0.5).ceil().max(0.0)) as usize;
        let i1 = (((xmax - lo.x) / h.x - 0.5).floor() as isize).min(res as isize - 1);
        let j0 = (((ymin - lo.y) / h.y - 0.5).ceil().max(0.0)) as usize;
        let j1 = (((ymax - lo.y) / h.y - 0.5).floor() as isize).min(res as isize - 1);
        let det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
        if det == 0.0 || i1 < 0 || j1 < 0 {
            continue;
        }
        for j in j0..=j1 as usize {
            let y = lo.y + (j as f64 + 0.5) * h.y;
            for i in i0..=i1 as usize {
                let x = lo.x + (i as f64 + 0.5) * h.x;
                let w1 = ((x - a.x) * (c.y - a.y) - (c.x - a.x) * (y - a.y)) / det;
                let w2 = ((b.x - a.x) * (y - a.y) - (x - a.x) * (b.y - a.y)) / det;
                let w0 = 1.0 - w1 - w2;
                // Half-open barycentric test so shared edges count once.
                if w0 >= 0.0 && w1 >= 0.0 && w2 >= 0.0 && (w0 > 0.0 || w1 > 0.0 || w2 > 0.0) {
                    if (w0 == 0.0 && w1 == 0.0) || (w1 == 0.0 && w2 == 0.0) || (w0 == 0.0 && w2 == 0.0) {
                        continue;
                    }
                    let z = w0 * a.z + w1 * b.z + w2 * c.z;
                    columns[j * res + i].push(z);
                }
            }
        }
    }
    let mut count = 0usize;
    for col in &mut columns {
        col.sort_by(f64::total_cmp);
        for pair in col.chunks_exact(2) {
            let k0 = ((pair[0] - lo.z) / h.z - 0.5).ceil().max(0.0) as isize;
            let k1 = (((pair[1] - lo.z) / h.z - 0.5).floor() as isize).min(res as isize - 1);
            if k1 >= k0 {
                count += (k1 - k0 + 1) as usize;
            }
        }
    }
    count as f64 * h.x * h.y * h.z
}

/// True iff the estimated material volume exceeds the mesh volume by less
/// than `alpha`.
pub fn termination_check(
    material: &MaterialState,
    mesh_volume: f64,
    alpha: f64,
    sample_budget: usize,
    seed: u64,
) -> Result<bool> {
    let (v, _) = estimate_volume(material, sample_budget, seed)?;
    Ok(v - mesh_volume < alpha)
}
