//! Image, mask and study data model.
//!
//! Pixels are stored row-major with `x` as the column and `y` as the row, so
//! the sample at `(x, y)` lives at index `y * width + x`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// A grayscale sample that statistics can be computed on.
///
/// Acquired data is `u16`; `f64` images exist so intensity transforms can be
/// applied without rounding.
pub trait Pixel: Copy + Send + Sync + PartialEq + std::fmt::Debug + 'static {
    fn to_f64(self) -> f64;
}

impl Pixel for u16 {
    #[inline]
    fn to_f64(self) -> f64 {
        f64::from(self)
    }
}

impl Pixel for f64 {
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}

/// One time-point image. Width and height are both at least 2.
#[derive(Debug, Clone, PartialEq)]
pub struct Image2D<T: Pixel = u16> {
    width: usize,
    height: usize,
    pixels: Vec<T>,
}

impl<T: Pixel> Image2D<T> {
    pub fn new(width: usize, height: usize, pixels: Vec<T>) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::InvalidImage(format!(
                "image must be at least 2x2, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "expected {} pixels for {width}x{height}, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: T) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn pixels(&self) -> &[T] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.pixels[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[T] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    pub fn map<U: Pixel>(&self, f: impl Fn(T) -> U) -> Image2D<U> {
        Image2D {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
        }
    }

    pub fn transpose(&self) -> Image2D<T> {
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for x in 0..self.width {
            for y in 0..self.height {
                pixels.push(self.get(x, y));
            }
        }
        Image2D {
            width: self.height,
            height: self.width,
            pixels,
        }
    }

    pub fn into_pixels(self) -> Vec<T> {
        self.pixels
    }
}

/// Per-pixel foreground (1) / background (0) map.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "expected {} mask bits for {width}x{height}, got {}",
                width * height,
                bits.len()
            )));
        }
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidImage(format!("mask bit {bad} is not 0 or 1")));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![0; width * height],
        }
    }

    pub fn ones(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![1; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(u8::from(f(x, y)));
            }
        }
        Self {
            width,
            height,
            bits,
        }
    }

    /// Builds a mask from any per-pixel truth values, in row-major order.
    pub(crate) fn from_bools(width: usize, height: usize, it: impl Iterator<Item = bool>) -> Self {
        let bits: Vec<u8> = it.map(u8::from).collect();
        debug_assert_eq!(bits.len(), width * height);
        Self {
            width,
            height,
            bits,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x] == 1
    }

    pub fn count(&self) -> usize {
        mask_count(self)
    }

    pub fn not(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|&b| 1 - b).collect(),
        }
    }

    /// True when every foreground pixel of `self` is also foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims()
            && self
                .bits
                .iter()
                .zip(&other.bits)
                .all(|(&a, &b)| a <= b)
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.bits
    }
}

/// Elementwise AND of two masks of equal shape.
pub fn mask_and(a: &BinaryMask, b: &BinaryMask) -> Result<BinaryMask> {
    if a.dims() != b.dims() {
        return Err(Error::mismatch(a.dims(), b.dims()));
    }
    Ok(BinaryMask {
        width: a.width,
        height: a.height,
        bits: a.bits.iter().zip(&b.bits).map(|(&x, &y)| x & y).collect(),
    })
}

/// Number of foreground pixels.
pub fn mask_count(m: &BinaryMask) -> usize {
    m.bits.iter().map(|&b| b as usize).sum()
}

/// All time-points acquired at one slice position, in acquisition order.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceSeries<T: Pixel = u16> {
    slice_index: usize,
    images: Vec<Image2D<T>>,
}

impl<T: Pixel> SliceSeries<T> {
    pub fn new(slice_index: usize, images: Vec<Image2D<T>>) -> Result<Self> {
        let first = images
            .first()
            .ok_or_else(|| Error::InconsistentStudy(format!("slice {slice_index} has no images")))?;
        let dims = first.dims();
        if let Some((t, img)) = images.iter().enumerate().find(|(_, i)| i.dims() != dims) {
            return Err(Error::InconsistentStudy(format!(
                "slice {slice_index} time-point {t} is {}x{}, expected {}x{}",
                img.width(),
                img.height(),
                dims.0,
                dims.1
            )));
        }
        Ok(Self {
            slice_index,
            images,
        })
    }

    #[inline]
    pub fn slice_index(&self) -> usize {
        self.slice_index
    }

    #[inline]
    pub fn images(&self) -> &[Image2D<T>] {
        &self.images
    }

    /// Number of time-points.
    #[inline]
    pub fn len(&self) -> usize {
        self.images.len()
    }

    /// Always false; a series holds at least one image.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.images[0].dims()
    }

    pub fn map<U: Pixel>(&self, f: impl Fn(T) -> U + Copy) -> SliceSeries<U> {
        SliceSeries {
            slice_index: self.slice_index,
            images: self.images.iter().map(|img| img.map(f)).collect(),
        }
    }

    pub fn truncated(&self, timepoints: usize) -> Result<SliceSeries<T>> {
        SliceSeries::new(
            self.slice_index,
            self.images.iter().take(timepoints).cloned().collect(),
        )
    }
}

/// A whole study: every slice has the same number of time-points and the same
/// image dimensions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PerfusionStudy {
    slices: Vec<SliceSeries>,
    pub metadata: BTreeMap<String, String>,
}

impl PerfusionStudy {
    pub fn new(slices: Vec<SliceSeries>, metadata: BTreeMap<String, String>) -> Result<Self> {
        if let Some(first) = slices.first() {
            let (t, dims) = (first.len(), first.dims());
            for s in &slices[1..] {
                if s.len() != t {
                    return Err(Error::InconsistentStudy(format!(
                        "slice {} has {} time-points, slice {} has {t}",
                        s.slice_index(),
                        s.len(),
                        first.slice_index()
                    )));
                }
                if s.dims() != dims {
                    return Err(Error::InconsistentStudy(format!(
                        "slice {} is {}x{}, slice {} is {}x{}",
                        s.slice_index(),
                        s.dims().0,
                        s.dims().1,
                        first.slice_index(),
                        dims.0,
                        dims.1
                    )));
                }
            }
        }
        Ok(Self { slices, metadata })
    }

    #[inline]
    pub fn slices(&self) -> &[SliceSeries] {
        &self.slices
    }

    /// Time-points per slice, 0 for an empty study.
    pub fn timepoints(&self) -> usize {
        self.slices.first().map_or(0, SliceSeries::len)
    }

    pub fn dims(&self) -> Option<(usize, usize)> {
        self.slices.first().map(SliceSeries::dims)
    }
}

/// Inclusive pixel rectangle `x0..=x1` by `y0..=y1`, at least 2x2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct CropBox {
    pub x0: usize,
    pub x1: usize,
    pub y0: usize,
    pub y1: usize,
}

impl CropBox {
    pub fn new(x0: usize, x1: usize, y0: usize, y1: usize, width: usize, height: usize) -> Result<Self> {
        if x0 >= x1 || y0 >= y1 || x1 >= width || y1 >= height {
            return Err(Error::InvalidCropBox {
                x0,
                x1,
                y0,
                y1,
                width,
                height,
            });
        }
        Ok(Self { x0, x1, y0, y1 })
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self {
            x0: 0,
            x1: width - 1,
            y0: 0,
            y1: height - 1,
        }
    }

    pub fn width(&self) -> usize {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0 + 1
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        (self.x0..=self.x1).contains(&x) && (self.y0..=self.y1).contains(&y)
    }

    pub(crate) fn fits(&self, width: usize, height: usize) -> bool {
        self.x0 < self.x1 && self.y0 < self.y1 && self.x1 < width && self.y1 < height
    }
}

/// Output of segmenting one slice series.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationResult {
    pub slice_index: usize,
    /// Final perfusion ROI: brain tissue with hyperintense (CSF) pixels removed.
    pub roi_mask: BinaryMask,
    /// Brain region after low-intensity extraction, hole filling and
    /// largest-component selection.
    pub brain_mask: BinaryMask,
    pub crop_box: CropBox,
    /// Whether `crop_box` is the full-image fallback.
    pub crop_box_fallback: bool,
    pub t_low: f64,
    pub t_high: f64,
    pub ref_timepoint: usize,
}
