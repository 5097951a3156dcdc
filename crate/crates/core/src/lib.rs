//! Automatic perfusion region-of-interest detection for dynamic susceptibility
//! contrast (DSC) perfusion MR image series.
//!
//! The segmentation removes air and non-brain tissue by thresholding a
//! reference time-point at `mean - std` of the pixels inside the approximate
//! brain location (found from standard-deviation projection profiles), fills
//! holes, keeps the largest connected region, then removes CSF by thresholding
//! every time-point at `mean + std` of that brain region and intersecting.
//!
//! ```
//! use perfseg::phantom::{generate_phantom, PhantomSpec};
//! use perfseg::pipeline::{segment_slice, PipelineConfig};
//! use perfseg::metrics::dice;
//!
//! let mut spec = PhantomSpec::with_size(96, 96, 8, 42);
//! spec.slices = 1;
//! let (study, truth) = generate_phantom(&spec).unwrap();
//! let result = segment_slice(&study.slices()[0], &PipelineConfig::default()).unwrap();
//! assert!(dice(&result.roi_mask, &truth[0].roi_mask).unwrap() > 0.95);
//! ```

pub mod cli;
pub mod error;
pub mod io;
pub mod metrics;
pub mod morphology;
pub mod phantom;
pub mod pipeline;
pub mod projection;
pub mod report;
pub mod thresholding;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    mask_and, mask_count, BinaryMask, CropBox, Image2D, PerfusionStudy, Pixel, SegmentationResult,
    SliceSeries,
};
