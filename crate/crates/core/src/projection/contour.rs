use super::{BinaryImage, CameraFrame};
use crate::geom::{signed_area2, Polygon2, Vec2};
use crate::{Error, Result};

const STEP: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

/// Traces every closed pixel-boundary loop of the image.
///
/// Loops run along pixel edges with set pixels on the left, so outer
/// boundaries come out counter-clockwise and holes clockwise. Vertices are
/// integer pixel-corner coordinates; straight runs are merged. Where two set
/// pixels touch only at a corner the trace turns right, joining them into
/// one loop.
pub fn trace_loops(image: &BinaryImage) -> Vec<Vec<Vec2>> {
    let n = image.resolution();
    let w = n + 1;
    // Outgoing boundary edges per corner as a 4-bit direction mask.
    let mut out = vec![0u8; w * w];
    let at = |x: usize, y: usize| y * w + x;
    let mut remaining = 0usize;
    for j in 0..n {
        for i in 0..n {
            if !image.get(i, j) {
                continue;
            }
            let (si, sj) = (i as isize, j as isize);
            if !image.get_signed(si, sj - 1) {
                out[at(i, j)] |= 1 << 0;
                remaining += 1;
            }
            if !image.get_signed(si + 1, sj) {
                out[at(i + 1, j)] |= 1 << 1;
                remaining += 1;
            }
            if !image.get_signed(si, sj + 1) {
                out[at(i + 1, j + 1)] |= 1 << 2;
                remaining += 1;
            }
            if !image.get_signed(si - 1, sj) {
                out[at(i, j + 1)] |= 1 << 3;
                remaining += 1;
            }
        }
    }

    let mut loops = Vec::new();
    let mut cursor = 0usize;
    while remaining > 0 {
        while out[cursor] == 0 {
            cursor += 1;
        }
        let start = cursor;
        let dir0 = out[start].trailing_zeros() as usize;
        let mut dir = dir0;
        let (mut x, mut y) = ((start % w) as i64, (start / w) as i64);
        let mut verts = Vec::new();
        let mut prev_dir = usize::MAX;
        loop {
            if dir != prev_dir {
                verts.push(Vec2::new(x as f64, y as f64));
            }
            out[at(x as usize, y as usize)] &= !(1 << dir);
            remaining -= 1;
            x += STEP[dir].0;
            y += STEP[dir].1;
            prev_dir = dir;
            let next = at(x as usize, y as usize);
            let mut mask = out[next];
            if next == start {
                mask |= 1 << dir0;
            }
            let Some(d) = [(dir + 3) % 4, dir, (dir + 1) % 4]
                .into_iter()
                .find(|&d| mask & (1 << d) != 0)
            else {
                break;
            };
            if next == start && d == dir0 {
                break;
            }
            dir = d;
        }
        // The start vertex is redundant when the loop closes on a straight run.
        if verts.len() > 2 && prev_dir == direction_of(verts[0], verts[1]) {
            verts.remove(0);
        }
        loops.push(verts);
    }
    loops
}

fn direction_of(a: Vec2, b: Vec2) -> usize {
    let d = b - a;
    if d.x > 0.0 {
        0
    } else if d.y > 0.0 {
        1
    } else if d.x < 0.0 {
        2
    } else {
        3
    }
}

/// Outer contour of the set pixels in image-plane coordinates: the traced
/// loop enclosing the largest area, counter-clockwise.
pub fn extract_outer_contour(image: &BinaryImage, frame: &CameraFrame) -> Result<Polygon2> {
    let loops = trace_loops(image);
    let best = loops
        .into_iter()
        .map(|l| (signed_area2(&l), l))
        .filter(|(a, _)| *a > 0.0)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or(Error::Empty("image has no set pixels"))?
        .1;
    let res = image.resolution();
    Polygon2::new(best.into_iter().map(|p| frame.from_pixel(p, res)).collect())
}
