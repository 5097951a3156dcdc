//! C ABI for perfseg.
//!
//! Every object crosses the boundary as an opaque pointer owned by the
//! caller and released with the matching `*_free` function. Fallible calls
//! return a [`PerfsegStatus`]; on failure a description is available from
//! [`perfseg_last_error_message`] on the same thread. Panics never unwind into
//! C: they are reported as [`PerfsegStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use perfseg::io::{load_image, load_mask, save_mask};
use perfseg::metrics::confusion;
use perfseg::pipeline::{segment_slice, PipelineConfig};
use perfseg::{BinaryMask, Error, Image2D, SegmentationResult, SliceSeries};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerfsegStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Io = 4,
    Decode = 5,
    SegmentationFailed = 6,
    /// A ratio with a zero denominator, e.g. Dice of two empty masks.
    Undefined = 7,
    Panic = 8,
}

/// 16-bit grayscale image.
pub struct PerfsegImage(Image2D);

/// Binary mask.
pub struct PerfsegMask(BinaryMask);

/// Time series of one slice, built up image by image.
pub struct PerfsegSeries {
    slice_index: usize,
    images: Vec<Image2D>,
}

/// Output of [`perfseg_segment_slice`].
pub struct PerfsegResult(SegmentationResult);

/// Inclusive pixel bounds.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PerfsegCropBox {
    pub x0: usize,
    pub x1: usize,
    pub y0: usize,
    pub y1: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PerfsegConfusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(PerfsegStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::DimensionMismatch { .. } => PerfsegStatus::DimensionMismatch,
            Error::Io { .. } => PerfsegStatus::Io,
            Error::ImageDecode { .. } | Error::ManifestParse { .. } => PerfsegStatus::Decode,
            Error::SegmentationFailed(_)
            | Error::StudyFailed(_)
            | Error::EmptyForeground
            | Error::EmptyRegion
            | Error::DegenerateBrainBox { .. }
            | Error::ProfileTooShort(_) => PerfsegStatus::SegmentationFailed,
            Error::BothEmpty | Error::UndefinedFraction(_) => PerfsegStatus::Undefined,
            _ => PerfsegStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PerfsegStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PerfsegStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PerfsegStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            PerfsegStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn borrow_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    let slot = borrow_mut(out, "output pointer")?;
    *slot = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(PerfsegStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn perfseg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread, or NULL if none.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn perfseg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Copies `width * height` row-major samples into a new image.
///
/// # Safety
/// `pixels` must point to `width * height` readable values; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn perfseg_image_new(
    width: usize,
    height: usize,
    pixels: *const u16,
    out: *mut *mut PerfsegImage,
) -> PerfsegStatus {
    guard(|| {
        if pixels.is_null() {
            return Err(null("pixels"));
        }
        let n = width
            .checked_mul(height)
            .ok_or_else(|| Failure(PerfsegStatus::InvalidArgument, "image too large".into()))?;
        let data = std::slice::from_raw_parts(pixels, n).to_vec();
        write_out(out, PerfsegImage(Image2D::new(width, height, data)?))
    })
}

/// Reads a binary PGM image.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn perfseg_image_load(path: *const c_char, out: *mut *mut PerfsegImage) -> PerfsegStatus {
    guard(|| {
        let img = load_image(path_arg(path)?)?;
        write_out(out, PerfsegImage(img))
    })
}

/// Width in pixels; 0 for NULL.
///
/// # Safety
/// `image` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn perfseg_image_width(image: *const PerfsegImage) -> usize {
    image.as_ref().map_or(0, |i| i.0.width())
}

/// Height in pixels; 0 for NULL.
///
/// # Safety
/// `image` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn perfseg_image_height(image: *const PerfsegImage) -> usize {
    image.as_ref().map_or(0, |i| i.0.height())
}

/// # Safety
/// `image` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn perfseg_image_free(image: *mut PerfsegImage) {
    free(image)
}

/// New mask from `width * height` bytes, each 0 or 1.
///
/// # Safety
/// `bits` must point to `width * height` readable bytes; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn perfseg_mask_new(
    width: usize,
    height: usize,
    bits: *const u8,
    out: *mut *mut PerfsegMask,
) -> PerfsegStatus {
    guard(|| {
        if bits.is_null() {
            return Err(null("bits"));
        }
        let n = width
            .checked_mul(height)
            .ok_or_else(|| Failure(PerfsegStatus::InvalidArgument, "mask too large".into()))?;
        let data = std::slice::from_raw_parts(bits, n).to_vec();
        write_out(out, PerfsegMask(BinaryMask::new(width, height, data)?))
    })
}

/// Reads a mask PGM (maxval 255, foreground above 127).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn perfseg_mask_load(path: *const c_char, out: *mut *mut PerfsegMask) -> PerfsegStatus {
    guard(|| {
        let m = load_mask(path_arg(path)?)?;
        write_out(out, PerfsegMask(m))
    })
}

/// Writes a mask PGM with 0 and 255.
///
/// # Safety
/// `mask` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn perfseg_mask_save(mask: *const PerfsegMask, path: *const c_char) -> PerfsegStatus {
    guard(|| {
        let m = borrow(mask, "mask")?;
        save_mask(&m.0, path_arg(path)?)?;
        Ok(())
    })
}

/// # Safety
/// `mask` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn perfseg_mask_width(mask: *const PerfsegMask) -> usize {
    mask.as_ref().map_or(0, |m| m.0.width())
}

/// # Safety
/// `mask` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn perfseg_mask_height(mask: *const PerfsegMask) -> usize {
    mask.as_ref().map_or(0, |m| m.0.height())
}

/// Number of foreground pixels; 0 for NULL.
///
/// # Safety
/// `mask` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn perfseg_mask_count(mask: *const PerfsegMask) -> usize {
    mask.as_ref().map_or(0, |m| m.0.count())
}

/// Copies the row-major 0/1 bytes into `buf`, which must hold at least
/// `width * height` bytes (`len`).
///
/// # Safety
/// `mask` must be a live handle; `buf` must be writable for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn perfseg_mask_copy_bits(mask: *const PerfsegMask, buf: *mut u8, len: usize) -> PerfsegStatus {
    guard(|| {
        let m = borrow(mask, "mask")?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let bits = m.0.bits();
        if len < bits.len() {
            return Err(Failure(
                PerfsegStatus::InvalidArgument,
                format!("buffer holds {len} bytes, mask needs {}", bits.len()),
            ));
        }
        ptr::copy_nonoverlapping(bits.as_ptr(), buf, bits.len());
        Ok(())
    })
}

/// # Safety
/// `mask` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn perfseg_mask_free(mask: *mut PerfsegMask) {
    free(mask)
}

/// Empty series for one slice position.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn perfseg_series_new(slice_index: usize, out: *mut *mut PerfsegSeries) -> PerfsegStatus {
    guard(|| write_out(out, PerfsegSeries { slice_index, images: Vec::new() }))
}

/// Appends a copy of `image` as the next time-point. All time-points must
/// share one size.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn perfseg_series_push(series: *mut PerfsegSeries, image: *const PerfsegImage) -> PerfsegStatus {
    guard(|| {
        let s = borrow_mut(series, "series")?;
        let img = borrow(image, "image")?;
        if let Some(first) = s.images.first() {
            if first.dims() != img.0.dims() {
                return Err(Failure(
                    PerfsegStatus::DimensionMismatch,
                    format!(
                        "time-point is {}x{}, series is {}x{}",
                        img.0.width(),
                        img.0.height(),
                        first.width(),
                        first.height()
                    ),
                ));
            }
        }
        s.images.push(img.0.clone());
        Ok(())
    })
}

/// Number of time-points; 0 for NULL.
///
/// # Safety
/// `series` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn perfseg_series_len(series: *const PerfsegSeries) -> usize {
    series.as_ref().map_or(0, |s| s.images.len())
}

/// # Safety
/// `series` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn perfseg_series_free(series: *mut PerfsegSeries) {
    free(series)
}

/// Segments one slice series using `ref_timepoint` as the reference image.
///
/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn perfseg_segment_slice(
    series: *const PerfsegSeries,
    ref_timepoint: usize,
    out: *mut *mut PerfsegResult,
) -> PerfsegStatus {
    guard(|| {
        let s = borrow(series, "series")?;
        let series = SliceSeries::new(s.slice_index, s.images.clone())?;
        let cfg = PipelineConfig { ref_timepoint, ..PipelineConfig::default() };
        write_out(out, PerfsegResult(segment_slice(&series, &cfg)?))
    })
}

/// Copy of the perfusion ROI mask.
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn perfseg_result_roi_mask(result: *const PerfsegResult, out: *mut *mut PerfsegMask) -> PerfsegStatus {
    guard(|| {
        let r = borrow(result, "result")?;
        write_out(out, PerfsegMask(r.0.roi_mask.clone()))
    })
}

/// Copy of the brain mask, before CSF removal.
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn perfseg_result_brain_mask(
    result: *const PerfsegResult,
    out: *mut *mut PerfsegMask,
) -> PerfsegStatus {
    guard(|| {
        let r = borrow(result, "result")?;
        write_out(out, PerfsegMask(r.0.brain_mask.clone()))
    })
}

/// Low and high thresholds.
///
/// # Safety
/// `result` must be a live handle; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn perfseg_result_thresholds(
    result: *const PerfsegResult,
    t_low: *mut f64,
    t_high: *mut f64,
) -> PerfsegStatus {
    guard(|| {
        let r = borrow(result, "result")?;
        *borrow_mut(t_low, "t_low")? = r.0.t_low;
        *borrow_mut(t_high, "t_high")? = r.0.t_high;
        Ok(())
    })
}

/// Crop box used for the low threshold. `fallback` (may be NULL) is set to
/// true when the whole image was used instead.
///
/// # Safety
/// `result` must be a live handle; `out` must be writable; `fallback` NULL
/// or writable.
#[no_mangle]
pub unsafe extern "C" fn perfseg_result_crop_box(
    result: *const PerfsegResult,
    out: *mut PerfsegCropBox,
    fallback: *mut bool,
) -> PerfsegStatus {
    guard(|| {
        let r = borrow(result, "result")?;
        let b = r.0.crop_box;
        *borrow_mut(out, "crop box")? = PerfsegCropBox { x0: b.x0, x1: b.x1, y0: b.y0, y1: b.y1 };
        if let Some(f) = fallback.as_mut() {
            *f = r.0.crop_box_fallback;
        }
        Ok(())
    })
}

/// # Safety
/// `result` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn perfseg_result_free(result: *mut PerfsegResult) {
    free(result)
}

/// Dice index of two same-sized masks.
///
/// # Safety
/// Both masks must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn perfseg_dice(a: *const PerfsegMask, b: *const PerfsegMask, out: *mut f64) -> PerfsegStatus {
    guard(|| {
        let d = perfseg::metrics::dice(&borrow(a, "a")?.0, &borrow(b, "b")?.0)?;
        *borrow_mut(out, "out")? = d;
        Ok(())
    })
}

/// Confusion counts of `pred` against `reference`.
///
/// # Safety
/// Both masks must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn perfseg_confusion(
    pred: *const PerfsegMask,
    reference: *const PerfsegMask,
    out: *mut PerfsegConfusion,
) -> PerfsegStatus {
    guard(|| {
        let c = confusion(&borrow(pred, "pred")?.0, &borrow(reference, "reference")?.0)?;
        *borrow_mut(out, "out")? = PerfsegConfusion { tp: c.tp, fp: c.fp, tn: c.tn, fn_: c.fn_ };
        Ok(())
    })
}
