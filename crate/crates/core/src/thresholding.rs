//! Region statistics and the low/high intensity thresholds.
//!
//! Both thresholds use a strict comparison: a pixel exactly at the low
//! threshold is background, a pixel exactly at the high threshold is kept.

use crate::error::{Error, Result};
use crate::types::{BinaryMask, CropBox, Image2D, Pixel};

/// Mean and sample standard deviation of a pixel set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionStats {
    pub mean: f64,
    /// Sample standard deviation (denominator `count - 1`); 0 for a single pixel.
    pub std: f64,
    pub count: usize,
}

impl RegionStats {
    /// Two-pass statistics over a non-empty sample.
    fn from_samples<I>(samples: I) -> Result<Self>
    where
        I: Iterator<Item = f64> + Clone,
    {
        let (count, sum) = samples.clone().fold((0usize, 0.0f64), |(n, s), v| (n + 1, s + v));
        if count == 0 {
            return Err(Error::EmptyRegion);
        }
        let mean = sum / count as f64;
        let std = if count == 1 {
            0.0
        } else {
            let ss: f64 = samples.map(|v| (v - mean) * (v - mean)).sum();
            (ss / (count - 1) as f64).sqrt()
        };
        Ok(Self { mean, std, count })
    }
}

/// Statistics over the pixels inside `bbox` (inclusive bounds).
pub fn stats_in_box<T: Pixel>(img: &Image2D<T>, bbox: &CropBox) -> Result<RegionStats> {
    if !bbox.fits(img.width(), img.height()) {
        return Err(Error::InvalidCropBox {
            x0: bbox.x0,
            x1: bbox.x1,
            y0: bbox.y0,
            y1: bbox.y1,
            width: img.width(),
            height: img.height(),
        });
    }
    let samples = (bbox.y0..=bbox.y1)
        .flat_map(move |y| img.row(y)[bbox.x0..=bbox.x1].iter().map(|p| p.to_f64()));
    RegionStats::from_samples(samples)
}

/// Statistics over the pixels where `mask` is set.
pub fn stats_in_mask<T: Pixel>(img: &Image2D<T>, mask: &BinaryMask) -> Result<RegionStats> {
    if img.dims() != mask.dims() {
        return Err(Error::mismatch(img.dims(), mask.dims()));
    }
    let samples = img
        .pixels()
        .iter()
        .zip(mask.bits())
        .filter(|(_, &b)| b == 1)
        .map(|(p, _)| p.to_f64());
    RegionStats::from_samples(samples)
}

/// `mean - std`. May be negative, in which case every pixel passes.
pub fn low_threshold(stats: &RegionStats) -> f64 {
    stats.mean - stats.std
}

/// `mean + std`.
pub fn high_threshold(stats: &RegionStats) -> f64 {
    stats.mean + stats.std
}

/// Foreground where the pixel is strictly above `t`.
pub fn apply_low_threshold<T: Pixel>(img: &Image2D<T>, t: f64) -> BinaryMask {
    BinaryMask::from_bools(
        img.width(),
        img.height(),
        img.pixels().iter().map(|p| p.to_f64() > t),
    )
}

/// Clears mask bits wherever the pixel is strictly above `t`.
pub fn remove_above_threshold<T: Pixel>(mask: &BinaryMask, img: &Image2D<T>, t: f64) -> Result<BinaryMask> {
    if img.dims() != mask.dims() {
        return Err(Error::mismatch(mask.dims(), img.dims()));
    }
    Ok(BinaryMask::from_bools(
        mask.width(),
        mask.height(),
        mask.bits()
            .iter()
            .zip(img.pixels())
            .map(|(&b, p)| b == 1 && p.to_f64() <= t),
    ))
}

/// User-chosen global threshold, kept as the comparison baseline. Same rule
/// as [`apply_low_threshold`].
pub fn baseline_fixed_threshold<T: Pixel>(img: &Image2D<T>, t: f64) -> BinaryMask {
    apply_low_threshold(img, t)
}
