//! Two-step perfusion ROI segmentation of a slice series.
//!
//! Step one works on a single reference time-point: crop to the approximate
//! brain location, threshold at `mean - std` of the crop, fill holes and keep
//! the largest region. Step two thresholds every time-point at `mean + std`
//! of that brain region (measured on the reference image) and intersects the
//! results, so a pixel hyperintense at any time-point is dropped.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::morphology::{fill_holes, largest_component};
use crate::projection::brain_crop_box;
use crate::thresholding::{
    apply_low_threshold, high_threshold, low_threshold, remove_above_threshold, stats_in_box,
    stats_in_mask,
};
use crate::types::{mask_and, CropBox, PerfusionStudy, Pixel, SegmentationResult, SliceSeries};

/// Default reference time-point: the 4th image, after the signal settles.
pub const DEFAULT_REF_TIMEPOINT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineConfig {
    pub ref_timepoint: usize,
    /// Use the whole image when the projection edges are degenerate instead
    /// of failing.
    pub fallback_full_box: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            ref_timepoint: DEFAULT_REF_TIMEPOINT,
            fallback_full_box: true,
        }
    }
}

pub fn segment_slice<T: Pixel>(series: &SliceSeries<T>, cfg: &PipelineConfig) -> Result<SegmentationResult> {
    let images = series.images();
    let reference = images.get(cfg.ref_timepoint).ok_or(Error::RefTimepointOutOfRange {
        index: cfg.ref_timepoint,
        len: images.len(),
    })?;
    let (w, h) = reference.dims();

    let (crop_box, crop_box_fallback) = match brain_crop_box(reference) {
        Ok(b) => (b, false),
        Err(Error::DegenerateBrainBox { .. }) if cfg.fallback_full_box => (CropBox::full(w, h), true),
        Err(e) => return Err(e),
    };

    let t_low = low_threshold(&stats_in_box(reference, &crop_box)?);
    let candidate = fill_holes(&apply_low_threshold(reference, t_low));
    let brain_mask = largest_component(&candidate).map_err(|e| match e {
        Error::EmptyForeground => Error::SegmentationFailed(format!(
            "slice {}: no pixel above the low threshold {t_low}",
            series.slice_index()
        )),
        other => other,
    })?;

    let t_high = high_threshold(&stats_in_mask(reference, &brain_mask)?);
    let mut roi_mask = brain_mask.clone();
    for img in images {
        roi_mask = mask_and(&roi_mask, &remove_above_threshold(&brain_mask, img, t_high)?)?;
    }

    Ok(SegmentationResult {
        slice_index: series.slice_index(),
        roi_mask,
        brain_mask,
        crop_box,
        crop_box_fallback,
        t_low,
        t_high,
        ref_timepoint: cfg.ref_timepoint,
    })
}

fn collect_results(study: &PerfusionStudy, outcomes: Vec<Result<SegmentationResult>>) -> Result<Vec<SegmentationResult>> {
    let mut ok = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (series, outcome) in study.slices().iter().zip(outcomes) {
        match outcome {
            Ok(r) => ok.push(r),
            Err(e) => failures.push((series.slice_index(), e)),
        }
    }
    if failures.is_empty() {
        Ok(ok)
    } else {
        Err(Error::StudyFailed(failures))
    }
}

/// Segments every slice on the current rayon pool. Results keep slice order
/// and are identical to [`segment_study_sequential`].
pub fn segment_study(study: &PerfusionStudy, cfg: &PipelineConfig) -> Result<Vec<SegmentationResult>> {
    let outcomes = study
        .slices()
        .par_iter()
        .map(|s| segment_slice(s, cfg))
        .collect();
    collect_results(study, outcomes)
}

pub fn segment_study_sequential(study: &PerfusionStudy, cfg: &PipelineConfig) -> Result<Vec<SegmentationResult>> {
    let outcomes = study.slices().iter().map(|s| segment_slice(s, cfg)).collect();
    collect_results(study, outcomes)
}

/// [`segment_study`] on a dedicated pool of `jobs` worker threads.
pub fn segment_study_with_jobs(
    study: &PerfusionStudy,
    cfg: &PipelineConfig,
    jobs: usize,
) -> Result<Vec<SegmentationResult>> {
    if jobs <= 1 {
        return segment_study_sequential(study, cfg);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::SegmentationFailed(format!("cannot start worker pool: {e}")))?;
    pool.install(|| segment_study(study, cfg))
}
