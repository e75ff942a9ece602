use super::{MaterialState, PrismCut, BOX_HALF};
use crate::geom::{perp, Vec2, Vec3};

type Intervals = Vec<(f64, f64)>;

/// Exact clipping of parallel rays `origin + s * dir` against a material.
///
/// For each cut, all rays of one direction project onto parallel lines in the
/// cut plane; polygon edges are binned by their offset across those lines so
/// each ray only visits the few edges it can cross.
pub struct RayCaster<'a> {
    material: &'a MaterialState,
    dir: Vec3,
    cuts: Vec<CutBands<'a>>,
}

enum CutBands<'a> {
    /// The ray runs along the cut's extrusion axis.
    Axial(&'a PrismCut),
    Banded {
        cut: &'a PrismCut,
        along: Vec2,
        across: Vec2,
        inv_speed: f64,
        h_min: f64,
        band: f64,
        bands: Vec<Vec<u32>>,
    },
}

impl<'a> RayCaster<'a> {
    pub fn new(material: &'a MaterialState, dir: Vec3) -> Self {
        let dir = dir.normalize();
        let cuts = material.cuts().map(|c| CutBands::new(c, dir)).collect();
        Self { material, dir, cuts }
    }

    /// Hull of the parameters where the ray passes the box or the workbench.
    pub fn support_span(&self, origin: &Vec3) -> Option<(f64, f64)> {
        let iv = self.support(origin);
        Some((iv.first()?.0, iv.last()?.1))
    }

    /// Parameter intervals along the ray lying inside the material.
    pub fn intervals(&self, origin: &Vec3) -> Intervals {
        let mut iv = self.support(origin);
        for cut in &self.cuts {
            if iv.is_empty() {
                break;
            }
            iv = cut.clip(origin, &iv);
        }
        iv
    }

    /// The ray meets the material in a segment of positive length.
    pub fn hits(&self, origin: &Vec3) -> bool {
        self.intervals(origin).iter().any(|(a, b)| b - a > 1e-12)
    }

    fn support(&self, o: &Vec3) -> Intervals {
        let d = self.dir;
        let mut out = Intervals::new();
        if let Some(iv) = slab(o, &d, &Vec3::repeat(-BOX_HALF), &Vec3::repeat(BOX_HALF)) {
            out.push(iv);
        }
        if let Some(w) = self.material.workbench() {
            if let Some(iv) = cylinder(o, &d, w) {
                out.push(iv);
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Intervals = Vec::with_capacity(out.len());
        for iv in out {
            match merged.last_mut() {
                Some(last) if iv.0 <= last.1 => last.1 = last.1.max(iv.1),
                _ => merged.push(iv),
            }
        }
        if let Some(zb) = self.material.bottom_plane() {
            let half = if d.z.abs() < 1e-15 {
                if o.z >= zb {
                    (f64::NEG_INFINITY, f64::INFINITY)
                } else {
                    return Vec::new();
                }
            } else if d.z > 0.0 {
                ((zb - o.z) / d.z, f64::INFINITY)
            } else {
                (f64::NEG_INFINITY, (zb - o.z) / d.z)
            };
            merged = intersect(&merged, &[half]);
        }
        merged
    }
}

impl<'a> CutBands<'a> {
    fn new(cut: &'a PrismCut, dir: Vec3) -> Self {
        let w = cut.frame().project(&dir);
        let speed = w.norm();
        if speed < 1e-9 {
            return CutBands::Axial(cut);
        }
        let along = w / speed;
        let across = perp(along);
        let verts = cut.polygon().vertices();
        let n = verts.len();
        let hs: Vec<f64> = verts.iter().map(|v| across.dot(v)).collect();
        let h_min = hs.iter().copied().fold(f64::INFINITY, f64::min);
        let h_max = hs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let count = (n / 4).clamp(1, 1024);
        let band = ((h_max - h_min) / count as f64).max(1e-300);
        let mut bands = vec![Vec::new(); count];
        for i in 0..n {
            let (a, b) = (hs[i], hs[(i + 1) % n]);
            let k0 = (((a.min(b) - h_min) / band) as usize).min(count - 1);
            let k1 = (((a.max(b) - h_min) / band) as usize).min(count - 1);
            for slot in &mut bands[k0..=k1] {
                slot.push(i as u32);
            }
        }
        CutBands::Banded {
            cut,
            along,
            across,
            inv_speed: 1.0 / speed,
            h_min,
            band,
            bands,
        }
    }

    fn clip(&self, origin: &Vec3, iv: &[(f64, f64)]) -> Intervals {
        match self {
            CutBands::Axial(cut) => {
                if cut.contains(origin) {
                    iv.to_vec()
                } else {
                    Vec::new()
                }
            }
            CutBands::Banded {
                cut,
                along,
                across,
                inv_speed,
                h_min,
                band,
                bands,
            } => {
                let q0 = cut.frame().project(origin);
                let h = across.dot(&q0);
                let t0 = along.dot(&q0);
                let k = ((h - h_min) / band).floor();
                if k < 0.0 || k as usize >= bands.len() {
                    return Vec::new();
                }
                let verts = cut.polygon().vertices();
                let n = verts.len();
                let mut hits: Vec<f64> = Vec::new();
                for &i in &bands[k as usize] {
                    let a = verts[i as usize];
                    let b = verts[(i as usize + 1) % n];
                    let ha = across.dot(&a);
                    let hb = across.dot(&b);
                    if (ha > h) != (hb > h) {
                        let x = a + (b - a) * ((h - ha) / (hb - ha));
                        hits.push((along.dot(&x) - t0) * inv_speed);
                    }
                }
                hits.sort_by(f64::total_cmp);
                let inside: Intervals = hits.chunks_exact(2).map(|p| (p[0], p[1])).collect();
                intersect(iv, &inside)
            }
        }
    }
}

fn intersect(a: &[(f64, f64)], b: &[(f64, f64)]) -> Intervals {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo <= hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

fn slab(o: &Vec3, d: &Vec3, lo: &Vec3, hi: &Vec3) -> Option<(f64, f64)> {
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for k in 0..3 {
        if d[k].abs() < 1e-15 {
            if o[k] < lo[k] || o[k] > hi[k] {
                return None;
            }
        } else {
            let a = (lo[k] - o[k]) / d[k];
            let b = (hi[k] - o[k]) / d[k];
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

fn cylinder(o: &Vec3, d: &Vec3, w: &super::Workbench) -> Option<(f64, f64)> {
    let (z0, z1) = if d.z.abs() < 1e-15 {
        if o.z < w.z_min || o.z > w.z_max {
            return None;
        }
        (f64::NEG_INFINITY, f64::INFINITY)
    } else {
        let a = (w.z_min - o.z) / d.z;
        let b = (w.z_max - o.z) / d.z;
        (a.min(b), a.max(b))
    };
    let px = o.x - w.center.0;
    let py = o.y - w.center.1;
    let a = d.x * d.x + d.y * d.y;
    let (r0, r1) = if a < 1e-30 {
        if px * px + py * py > w.radius * w.radius {
            return None;
        }
        (f64::NEG_INFINITY, f64::INFINITY)
    } else {
        let b = px * d.x + py * d.y;
        let c = px * px + py * py - w.radius * w.radius;
        let disc = b * b - a * c;
        if disc < 0.0 {
            return None;
        }
        let s = disc.sqrt();
        ((-b - s) / a, (-b + s) / a)
    };
    let lo = z0.max(r0);
    let hi = z1.min(r1);
    (lo <= hi).then_some((lo, hi))
}
