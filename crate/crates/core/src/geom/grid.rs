use super::{bbox2, Vec2};

/// Uniform grid over the edges of a polyline, used to cull segment queries.
#[derive(Debug, Clone)]
pub struct EdgeGrid {
    edges: Vec<(Vec2, Vec2)>,
    origin: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

impl EdgeGrid {
    /// Grid over the edges of a closed polygon (edge `i` joins `i` and `i+1`).
    pub fn from_closed(vertices: &[Vec2]) -> Self {
        let n = vertices.len();
        let edges = (0..n)
            .map(|i| (vertices[i], vertices[(i + 1) % n]))
            .collect();
        Self::from_edges(edges)
    }

    pub fn from_edges(edges: Vec<(Vec2, Vec2)>) -> Self {
        let pts: Vec<Vec2> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
        let (lo, hi) = if pts.is_empty() {
            (Vec2::zeros(), Vec2::repeat(1.0))
        } else {
            bbox2(&pts)
        };
        let extent = (hi - lo).max().max(1e-12);
        let target = ((edges.len() as f64).sqrt().ceil() as usize).clamp(1, 512);
        let cell = extent / target as f64 * 1.000001;
        let nx = (((hi.x - lo.x) / cell) as usize + 1).max(1);
        let ny = (((hi.y - lo.y) / cell) as usize + 1).max(1);
        let mut grid = Self {
            edges,
            origin: lo,
            cell,
            nx,
            ny,
            cells: vec![Vec::new(); nx * ny],
        };
        for i in 0..grid.edges.len() {
            let (a, b) = grid.edges[i];
            let (x0, y0, x1, y1) = grid.cell_range(a.inf(&b), a.sup(&b));
            for y in y0..=y1 {
                for x in x0..=x1 {
                    grid.cells[y * nx + x].push(i as u32);
                }
            }
        }
        grid
    }

    pub fn edges(&self) -> &[(Vec2, Vec2)] {
        &self.edges
    }

    fn cell_range(&self, lo: Vec2, hi: Vec2) -> (usize, usize, usize, usize) {
        let f = |v: f64, o: f64, n: usize| -> usize {
            let k = ((v - o) / self.cell).floor();
            if k < 0.0 {
                0
            } else {
                (k as usize).min(n - 1)
            }
        };
        (
            f(lo.x, self.origin.x, self.nx),
            f(lo.y, self.origin.y, self.ny),
            f(hi.x, self.origin.x, self.nx),
            f(hi.y, self.origin.y, self.ny),
        )
    }

    /// Calls `visit` once for every edge whose cells overlap the bounding box
    /// of segment `[a, b]`.
    pub fn for_each_candidate(&self, a: Vec2, b: Vec2, mut visit: impl FnMut(usize)) {
        self.for_each_in_box(a.inf(&b), a.sup(&b), &mut visit);
    }

    pub fn for_each_in_box(&self, lo: Vec2, hi: Vec2, visit: &mut impl FnMut(usize)) {
        let end = self.origin + Vec2::new(self.nx as f64, self.ny as f64) * self.cell;
        if hi.x < self.origin.x || hi.y < self.origin.y || lo.x > end.x || lo.y > end.y {
            return;
        }
        let (x0, y0, x1, y1) = self.cell_range(lo, hi);
        if x0 == x1 && y0 == y1 {
            for &i in &self.cells[y0 * self.nx + x0] {
                visit(i as usize);
            }
            return;
        }
        let mut seen = std::collections::HashSet::new();
        for y in y0..=y1 {
            for x in x0..=x1 {
                for &i in &self.cells[y * self.nx + x] {
                    if seen.insert(i) {
                        visit(i as usize);
                    }
                }
            }
        }
    }

    /// Does segment `[a, b]` touch any indexed edge?
    pub fn segment_hits(&self, a: Vec2, b: Vec2) -> bool {
        let mut hit = false;
        self.for_each_candidate(a, b, |i| {
            if !hit {
                let (c, d) = self.edges[i];
                hit = super::segments_intersect(a, b, c, d);
            }
        });
        hit
    }

    /// Distance from `p` to the nearest indexed edge (expanding ring search).
    pub fn distance(&self, p: Vec2) -> f64 {
        let mut best = f64::INFINITY;
        let mut r = self.cell;
        loop {
            let lo = p - Vec2::repeat(r);
            let hi = p + Vec2::repeat(r);
            self.for_each_in_box(lo, hi, &mut |i| {
                let (a, b) = self.edges[i];
                best = best.min(super::point_segment_distance(p, a, b));
            });
            if best <= r {
                return best;
            }
            let span = self.cell * (self.nx.max(self.ny) as f64);
            let d_origin = (p - self.origin).norm() + 2.0 * span;
            if r > d_origin {
                return best;
            }
            r *= 2.0;
        }
    }
}
