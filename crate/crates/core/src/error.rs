use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid crop box ({x0}..={x1}, {y0}..={y1}) for a {width}x{height} image")]
    InvalidCropBox {
        x0: usize,
        x1: usize,
        y0: usize,
        y1: usize,
        width: usize,
        height: usize,
    },

    #[error("projection profile too short: {0} values (need at least 2)")]
    ProfileTooShort(usize),

    #[error("degenerate brain box: x {x0}..{x1}, y {y0}..{y1}")]
    DegenerateBrainBox {
        x0: usize,
        x1: usize,
        y0: usize,
        y1: usize,
    },

    #[error("region selects no pixels")]
    EmptyRegion,

    #[error("mask has no foreground pixels")]
    EmptyForeground,

    #[error("segmentation failed: {0}")]
    SegmentationFailed(String),

    #[error("{} slice(s) failed: {}", .0.len(), describe_failures(.0))]
    StudyFailed(Vec<(usize, Error)>),

    #[error("reference time-point {index} out of range for a series of {len} images")]
    RefTimepointOutOfRange { index: usize, len: usize },

    #[error("inconsistent series or study: {0}")]
    InconsistentStudy(String),

    #[error("dice is undefined when both masks are empty")]
    BothEmpty,

    #[error("undefined fraction: {0} has a zero denominator")]
    UndefinedFraction(&'static str),

    #[error("summary requires at least one measurement")]
    EmptyInput,

    #[error("invalid phantom spec: {0}")]
    InvalidSpec(String),

    #[error("cannot parse manifest {path}: {reason}")]
    ManifestParse { path: PathBuf, reason: String },

    #[error("cannot decode image {path}: {reason}")]
    ImageDecode { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn describe_failures(failures: &[(usize, Error)]) -> String {
    failures
        .iter()
        .map(|(slice, e)| format!("slice {slice}: {e}"))
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn decode(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::ImageDecode {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn mismatch(left: (usize, usize), right: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            left_width: left.0,
            left_height: left.1,
            right_width: right.0,
            right_height: right.1,
        }
    }
}
