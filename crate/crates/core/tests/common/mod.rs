//! Shared helpers for the integration tests: a seeded generator and
//! brute-force reference implementations written independently of the
//! library.
#![allow(dead_code)]

use std::collections::VecDeque;

use perfseg::{BinaryMask, Image2D, SliceSeries};

/// SplitMix64, so every random draw in the suite is reproducible.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `lo..hi`.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo) as u64) as usize
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Mask with roughly `density` foreground.
    pub fn mask(&mut self, w: usize, h: usize, density: f64) -> BinaryMask {
        BinaryMask::from_fn(w, h, |_, _| self.unit() < density)
    }

    pub fn image(&mut self, w: usize, h: usize, max: u16) -> Image2D {
        let px = (0..w * h).map(|_| self.range(0, max as usize + 1) as u16).collect();
        Image2D::new(w, h, px).unwrap()
    }
}

/// Small synthetic study: dark background, a bright blob with a hyperintense
/// spot that moves over time, plus uniform noise.
pub fn blob_series(rng: &mut Rng, slice_index: usize) -> SliceSeries {
    let w = rng.range(12, 40);
    let h = rng.range(12, 40);
    let t = rng.range(4, 9);
    let x0 = rng.range(1, w / 3);
    let x1 = rng.range(2 * w / 3, w - 1);
    let y0 = rng.range(1, h / 3);
    let y1 = rng.range(2 * h / 3, h - 1);
    let tissue = rng.range(600, 1200) as f64;
    let noise = rng.range(1, 120) as f64;
    let images = (0..t)
        .map(|ti| {
            let sx = x0 + (ti * 3) % (x1 - x0).max(1);
            let sy = y0 + (ti * 5) % (y1 - y0).max(1);
            Image2D::from_fn(w, h, |x, y| {
                let inside = (x0..=x1).contains(&x) && (y0..=y1).contains(&y);
                let base = if !inside {
                    40.0
                } else if x.abs_diff(sx) <= 1 && y.abs_diff(sy) <= 1 {
                    3000.0
                } else {
                    tissue
                };
                (base + noise * rng.unit()).round() as u16
            })
            .unwrap()
        })
        .collect();
    SliceSeries::new(slice_index, images).unwrap()
}

pub fn bit(m: &BinaryMask, x: usize, y: usize) -> bool {
    m.bits()[y * m.width() + x] == 1
}

/// `(tp, fp, tn, fn)` counted pixel by pixel.
pub fn brute_confusion(pred: &BinaryMask, reference: &BinaryMask) -> (u64, u64, u64, u64) {
    let mut c = (0, 0, 0, 0);
    for y in 0..pred.height() {
        for x in 0..pred.width() {
            match (bit(pred, x, y), bit(reference, x, y)) {
                (true, true) => c.0 += 1,
                (true, false) => c.1 += 1,
                (false, false) => c.2 += 1,
                (false, true) => c.3 += 1,
            }
        }
    }
    c
}

fn neighbours(x: usize, y: usize, w: usize, h: usize, eight: bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for dy in -1i64..=1 {
        for dx in -1i64..=1 {
            if (dx == 0 && dy == 0) || (!eight && dx != 0 && dy != 0) {
                continue;
            }
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                out.push((nx as usize, ny as usize));
            }
        }
    }
    out
}

/// Breadth-first flood fill from `seeds` over pixels whose bit equals `value`.
fn flood(m: &BinaryMask, seeds: &[(usize, usize)], value: bool, eight: bool) -> Vec<bool> {
    let (w, h) = m.dims();
    let mut seen = vec![false; w * h];
    let mut queue = VecDeque::new();
    for &(x, y) in seeds {
        if bit(m, x, y) == value && !seen[y * w + x] {
            seen[y * w + x] = true;
            queue.push_back((x, y));
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        for (nx, ny) in neighbours(x, y, w, h, eight) {
            if bit(m, nx, ny) == value && !seen[ny * w + nx] {
                seen[ny * w + nx] = true;
                queue.push_back((nx, ny));
            }
        }
    }
    seen
}

/// Background not 4-reachable from the border becomes foreground.
pub fn brute_fill_holes(m: &BinaryMask) -> BinaryMask {
    let (w, h) = m.dims();
    let border: Vec<(usize, usize)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| x == 0 || y == 0 || x == w - 1 || y == h - 1)
        .collect();
    let outside = flood(m, &border, false, false);
    BinaryMask::from_fn(w, h, |x, y| bit(m, x, y) || !outside[y * w + x])
}

/// Largest 8-connected foreground component; on equal sizes the one whose
/// first pixel comes first in raster order.
pub fn brute_largest(m: &BinaryMask) -> Option<BinaryMask> {
    let (w, h) = m.dims();
    let mut taken = vec![false; w * h];
    let mut best: Option<(usize, Vec<bool>)> = None;
    for y in 0..h {
        for x in 0..w {
            if !bit(m, x, y) || taken[y * w + x] {
                continue;
            }
            let comp = flood(m, &[(x, y)], true, true);
            let size = comp.iter().filter(|&&b| b).count();
            for (t, &c) in taken.iter_mut().zip(&comp) {
                *t |= c;
            }
            if best.as_ref().is_none_or(|(s, _)| size > *s) {
                best = Some((size, comp));
            }
        }
    }
    best.map(|(_, comp)| BinaryMask::from_fn(w, h, |x, y| comp[y * w + x]))
}

/// Sample standard deviation by the textbook two-pass formula.
pub fn two_pass_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Per-column and per-row standard deviations.
pub fn brute_profiles(img: &Image2D) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = img.dims();
    let cols = (0..w)
        .map(|x| two_pass_std(&(0..h).map(|y| img.get(x, y) as f64).collect::<Vec<_>>()))
        .collect();
    let rows = (0..h)
        .map(|y| two_pass_std(&(0..w).map(|x| img.get(x, y) as f64).collect::<Vec<_>>()))
        .collect();
    (cols, rows)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
