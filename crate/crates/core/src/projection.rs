//! Standard-deviation projection profiles and the brain crop box.
//!
//! A horizontal profile has one value per column (the sample standard
//! deviation of that column's pixels); a vertical profile has one value per
//! row. The approximate brain location is the rectangle whose edges sit at
//! the global maximum and minimum of each profile's first derivative.

use crate::error::{Error, Result};
use crate::types::{CropBox, Image2D, Pixel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Project onto the x axis: one value per column.
    Horizontal,
    /// Project onto the y axis: one value per row.
    Vertical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionProfile {
    pub axis: Axis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileDerivative {
    pub values: Vec<f64>,
}

/// Per-line sample standard deviation (denominator `n - 1`).
pub fn std_projection<T: Pixel>(img: &Image2D<T>, axis: Axis) -> ProjectionProfile {
    let (w, h) = img.dims();
    let values = match axis {
        Axis::Horizontal => {
            let mut mean = vec![0.0f64; w];
            for y in 0..h {
                for (acc, p) in mean.iter_mut().zip(img.row(y)) {
                    *acc += p.to_f64();
                }
            }
            mean.iter_mut().for_each(|m| *m /= h as f64);
            let mut ss = vec![0.0f64; w];
            for y in 0..h {
                for ((acc, p), m) in ss.iter_mut().zip(img.row(y)).zip(&mean) {
                    let d = p.to_f64() - m;
                    *acc += d * d;
                }
            }
            ss.into_iter().map(|s| (s / (h - 1) as f64).sqrt()).collect()
        }
        Axis::Vertical => (0..h).map(|y| line_std(img.row(y))).collect(),
    };
    ProjectionProfile { axis, values }
}

fn line_std<T: Pixel>(line: &[T]) -> f64 {
    let n = line.len() as f64;
    let mean = line.iter().map(|p| p.to_f64()).sum::<f64>() / n;
    let ss: f64 = line
        .iter()
        .map(|p| {
            let d = p.to_f64() - mean;
            d * d
        })
        .sum();
    (ss / (n - 1.0)).sqrt()
}

/// Central differences in the interior, one-sided differences at both ends.
pub fn first_derivative(profile: &ProjectionProfile) -> Result<ProfileDerivative> {
    derivative_of(&profile.values).map(|values| ProfileDerivative { values })
}

fn derivative_of(p: &[f64]) -> Result<Vec<f64>> {
    let n = p.len();
    if n < 2 {
        return Err(Error::ProfileTooShort(n));
    }
    let mut d = Vec::with_capacity(n);
    d.push(p[1] - p[0]);
    d.extend(p.windows(3).map(|w| (w[2] - w[0]) / 2.0));
    d.push(p[n - 1] - p[n - 2]);
    Ok(d)
}

/// Index of the first global maximum.
fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Index of the first global minimum.
fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x < v[best] {
            best = i;
        }
    }
    best
}

/// Rising and falling edges of a profile: `(argmax d, argmin d)`.
fn profile_edges(profile: &ProjectionProfile) -> Result<(usize, usize)> {
    let d = first_derivative(profile)?;
    Ok((argmax(&d.values), argmin(&d.values)))
}

/// Approximate anatomical brain location.
///
/// Fails with [`Error::DegenerateBrainBox`] when a rising edge does not lie
/// strictly left of (or above) the matching falling edge.
pub fn brain_crop_box<T: Pixel>(img: &Image2D<T>) -> Result<CropBox> {
    let (x0, x1) = profile_edges(&std_projection(img, Axis::Horizontal))?;
    let (y0, y1) = profile_edges(&std_projection(img, Axis::Vertical))?;
    if x0 >= x1 || y0 >= y1 {
        return Err(Error::DegenerateBrainBox { x0, x1, y0, y1 });
    }
    CropBox::new(x0, x1, y0, y1, img.width(), img.height())
}
