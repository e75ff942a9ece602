use crate::{Error, Result};
use std::io::Write;
use std::path::Path;

pub const DEFAULT_RESOLUTION: usize = 256;

/// Square occupancy image, row-major; row `j` holds pixels with image-plane
/// `y` in the `j`-th band counted from the bottom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    resolution: usize,
    bits: Vec<bool>,
}

impl BinaryImage {
    pub fn new(resolution: usize) -> Self {
        Self {
            resolution,
            bits: vec![false; resolution * resolution],
        }
    }

    pub fn filled(resolution: usize) -> Self {
        Self {
            resolution,
            bits: vec![true; resolution * resolution],
        }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[j * self.resolution + i]
    }

    /// Out-of-range coordinates read as unset.
    #[inline]
    pub fn get_signed(&self, i: isize, j: isize) -> bool {
        let n = self.resolution as isize;
        i >= 0 && j >= 0 && i < n && j < n && self.bits[(j * n + i) as usize]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.bits[j * self.resolution + i] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_subset_of(&self, other: &BinaryImage) -> bool {
        self.resolution == other.resolution
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn union_with(&mut self, other: &BinaryImage) {
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    /// One step of 8-neighbour dilation.
    pub fn dilated(&self) -> BinaryImage {
        let n = self.resolution as isize;
        let mut out = BinaryImage::new(self.resolution);
        for j in 0..n {
            for i in 0..n {
                let hit = (-1..=1).any(|dj| (-1..=1).any(|di| self.get_signed(i + di, j + dj)));
                out.bits[(j * n + i) as usize] = hit;
            }
        }
        out
    }

    /// Binary PGM (P5, maxval 255); the top image row is written first.
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let n = self.resolution;
        let mut data = format!("P5\n{n} {n}\n255\n").into_bytes();
        for j in (0..n).rev() {
            data.extend((0..n).map(|i| if self.get(i, j) { 255u8 } else { 0 }));
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&data).map_err(|e| Error::io(path, e))
    }
}

/// Number of pixels that differ, i.e. the squared Frobenius norm of the
/// difference of two 0/1 images.
pub fn area_mismatch(img_b: &BinaryImage, img_m: &BinaryImage) -> Result<u64> {
    if img_b.resolution != img_m.resolution {
        return Err(Error::ResolutionMismatch(img_b.resolution, img_m.resolution));
    }
    Ok(img_b
        .bits
        .iter()
        .zip(&img_m.bits)
        .filter(|(a, b)| a != b)
        .count() as u64)
}
