use crate::geom::Vec3;
use crate::projection::Viewpoint;
use crate::{Error, Result};

/// Neighbors precomputed per candidate.
pub const KNN: usize = 10;

/// Great-circle angle between two unit vectors.
#[inline]
pub fn angular_distance(a: &Vec3, b: &Vec3) -> f64 {
    // atan2 keeps precision for nearly (anti)parallel vectors
    a.cross(b).norm().atan2(a.dot(b))
}

/// Discrete set of viewpoints with cached directions and angular k-nearest
/// neighbors.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    viewpoints: Vec<Viewpoint>,
    dirs: Vec<Vec3>,
    knn: Vec<Vec<u32>>,
}

/// `n` viewpoints on the sphere of radius `r`: uniform in `sin(phi)`,
/// golden-angle steps in azimuth.
pub fn fibonacci_sample(n: usize, r: f64) -> Result<CandidateSet> {
    if n < 1 {
        return Err(Error::InvalidArgument("need at least one candidate".into()));
    }
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let viewpoints = (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            Viewpoint::new(z.asin(), golden * i as f64, r)
        })
        .collect::<Result<Vec<_>>>()?;
    CandidateSet::new(viewpoints)
}

impl CandidateSet {
    pub fn new(viewpoints: Vec<Viewpoint>) -> Result<Self> {
        if viewpoints.is_empty() {
            return Err(Error::Empty("candidate set"));
        }
        let dirs: Vec<Vec3> = viewpoints.iter().map(|v| v.direction()).collect();
        let knn = nearest_neighbors(&dirs, KNN);
        Ok(Self {
            viewpoints,
            dirs,
            knn,
        })
    }

    /// Candidates satisfying `keep`, in their original order.
    pub fn filtered(&self, mut keep: impl FnMut(&Viewpoint) -> bool) -> Result<Self> {
        Self::new(self.viewpoints.iter().copied().filter(|v| keep(v)).collect())
    }

    /// Candidates on the upper hemisphere (`phi >= 0`).
    pub fn upper_hemisphere(&self) -> Result<Self> {
        self.filtered(|v| v.phi >= 0.0)
    }

    pub fn len(&self) -> usize {
        self.viewpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.viewpoints.is_empty()
    }

    pub fn viewpoints(&self) -> &[Viewpoint] {
        &self.viewpoints
    }

    pub fn viewpoint(&self, i: usize) -> Viewpoint {
        self.viewpoints[i]
    }

    pub fn direction(&self, i: usize) -> &Vec3 {
        &self.dirs[i]
    }

    /// Up to [`KNN`] nearest other candidates, closest first.
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.knn[i]
    }

    pub fn angle(&self, i: usize, j: usize) -> f64 {
        angular_distance(&self.dirs[i], &self.dirs[j])
    }

    /// Candidate closest in angle to a unit direction.
    pub fn nearest(&self, dir: &Vec3) -> usize {
        let mut best = 0;
        let mut best_dot = f64::NEG_INFINITY;
        for (i, d) in self.dirs.iter().enumerate() {
            let dot = d.dot(dir);
            if dot > best_dot {
                best_dot = dot;
                best = i;
            }
        }
        best
    }

    /// Index of the candidate with the given viewpoint, if present.
    pub fn position(&self, v: &Viewpoint) -> Option<usize> {
        self.viewpoints.iter().position(|w| w == v)
    }
}

fn nearest_neighbors(dirs: &[Vec3], k: usize) -> Vec<Vec<u32>> {
    let n = dirs.len();
    let k = k.min(n - 1);
    (0..n)
        .map(|i| {
            // (dot, index) of the k largest dots, sorted descending
            let mut best: Vec<(f64, u32)> = Vec::with_capacity(k + 1);
            for j in 0..n {
                if j == i {
                    continue;
                }
                let dot = dirs[i].dot(&dirs[j]);
                if best.len() == k && best.last().is_some_and(|b| dot <= b.0) {
                    continue;
                }
                let at = best.partition_point(|b| b.0 >= dot);
                best.insert(at, (dot, j as u32));
                best.truncate(k);
            }
            best.into_iter().map(|b| b.1).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_candidate() {
        let c = fibonacci_sample(1, 2.0).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c.neighbors(0).is_empty());
        assert!(fibonacci_sample(0, 2.0).is_err());
    }

    #[test]
    fn lattice_is_uniform() {
        let c = fibonacci_sample(5000, 2.0).unwrap();
        let nn: Vec<f64> = (0..c.len()).map(|i| c.angle(i, c.neighbors(i)[0] as usize)).collect();
        let mean = nn.iter().sum::<f64>() / nn.len() as f64;
        let var = nn.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / nn.len() as f64;
        assert!(var.sqrt() / mean < 0.25);
        let centroid: Vec3 = (0..c.len()).map(|i| *c.direction(i)).sum::<Vec3>() / c.len() as f64;
        assert!(centroid.norm() < 0.05);
        assert!(nn.iter().all(|&d| d > 1e-6), "duplicate candidates");
        assert!(c.viewpoints().iter().all(|v| v.r == 2.0));
    }

    #[test]
    fn knn_matches_brute_force() {
        let c = fibonacci_sample(300, 1.0).unwrap();
        for i in (0..300).step_by(17) {
            let mut all: Vec<(f64, usize)> = (0..300).filter(|&j| j != i).map(|j| (c.angle(i, j), j)).collect();
            all.sort_by(|a, b| a.0.total_cmp(&b.0));
            let expected: Vec<f64> = all[..KNN].iter().map(|a| a.0).collect();
            let got: Vec<f64> = c.neighbors(i).iter().map(|&j| c.angle(i, j as usize)).collect();
            for (e, g) in expected.iter().zip(&got) {
                assert!((e - g).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hemisphere_filter() {
        let c = fibonacci_sample(400, 2.0).unwrap().upper_hemisphere().unwrap();
        assert_eq!(c.len(), 200);
        assert!(c.viewpoints().iter().all(|v| v.phi >= 0.0));
    }
}
