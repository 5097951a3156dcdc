#ifndef PERFSEG_H
#define PERFSEG_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum PerfsegStatus {
  PERFSEG_STATUS_OK = 0,
  PERFSEG_STATUS_NULL_POINTER = 1,
  PERFSEG_STATUS_INVALID_ARGUMENT = 2,
  PERFSEG_STATUS_DIMENSION_MISMATCH = 3,
  PERFSEG_STATUS_IO = 4,
  PERFSEG_STATUS_DECODE = 5,
  PERFSEG_STATUS_SEGMENTATION_FAILED = 6,
  // A ratio with a zero denominator, e.g. Dice of two empty masks.
  PERFSEG_STATUS_UNDEFINED = 7,
  PERFSEG_STATUS_PANIC = 8,
} PerfsegStatus;

// 16-bit grayscale image.
typedef struct PerfsegImage PerfsegImage;

// Binary mask.
typedef struct PerfsegMask PerfsegMask;

// Output of [`perfseg_segment_slice`].
typedef struct PerfsegResult PerfsegResult;

// Time series of one slice, built up image by image.
typedef struct PerfsegSeries PerfsegSeries;

// Inclusive pixel bounds.
typedef struct PerfsegCropBox {
  size_t x0;
  size_t x1;
  size_t y0;
  size_t y1;
} PerfsegCropBox;

typedef struct PerfsegConfusion {
  uint64_t tp;
  uint64_t fp;
  uint64_t tn;
  uint64_t fn_;
} PerfsegConfusion;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static NUL-terminated string.
const char *perfseg_version(void);

// Message for the most recent failure on this thread, or NULL if none.
// Valid until the next failing call on the same thread.
const char *perfseg_last_error_message(void);

// Copies `width * height` row-major samples into a new image.
//
// # Safety
// `pixels` must point to `width * height` readable values; `out` must be
// writable.
enum PerfsegStatus perfseg_image_new(size_t width,
                                     size_t height,
                                     const uint16_t *pixels,
                                     struct PerfsegImage **out);

// Reads a binary PGM image.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum PerfsegStatus perfseg_image_load(const char *path, struct PerfsegImage **out);

// Width in pixels; 0 for NULL.
//
// # Safety
// `image` must be NULL or a live handle.
size_t perfseg_image_width(const struct PerfsegImage *image);

// Height in pixels; 0 for NULL.
//
// # Safety
// `image` must be NULL or a live handle.
size_t perfseg_image_height(const struct PerfsegImage *image);

// # Safety
// `image` must be NULL or a handle not yet freed.
void perfseg_image_free(struct PerfsegImage *image);

// New mask from `width * height` bytes, each 0 or 1.
//
// # Safety
// `bits` must point to `width * height` readable bytes; `out` must be
// writable.
enum PerfsegStatus perfseg_mask_new(size_t width,
                                    size_t height,
                                    const uint8_t *bits,
                                    struct PerfsegMask **out);

// Reads a mask PGM (maxval 255, foreground above 127).
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum PerfsegStatus perfseg_mask_load(const char *path, struct PerfsegMask **out);

// Writes a mask PGM with 0 and 255.
//
// # Safety
// `mask` must be a live handle; `path` a NUL-terminated string.
enum PerfsegStatus perfseg_mask_save(const struct PerfsegMask *mask, const char *path);

// # Safety
// `mask` must be NULL or a live handle.
size_t perfseg_mask_width(const struct PerfsegMask *mask);

// # Safety
// `mask` must be NULL or a live handle.
size_t perfseg_mask_height(const struct PerfsegMask *mask);

// Number of foreground pixels; 0 for NULL.
//
// # Safety
// `mask` must be NULL or a live handle.
size_t perfseg_mask_count(const struct PerfsegMask *mask);

// Copies the row-major 0/1 bytes into `buf`, which must hold at least
// `width * height` bytes (`len`).
//
// # Safety
// `mask` must be a live handle; `buf` must be writable for `len` bytes.
enum PerfsegStatus perfseg_mask_copy_bits(const struct PerfsegMask *mask, uint8_t *buf, size_t len);

// # Safety
// `mask` must be NULL or a handle not yet freed.
void perfseg_mask_free(struct PerfsegMask *mask);

// Empty series for one slice position.
//
// # Safety
// `out` must be writable.
enum PerfsegStatus perfseg_series_new(size_t slice_index, struct PerfsegSeries **out);

// Appends a copy of `image` as the next time-point. All time-points must
// share one size.
//
// # Safety
// Both handles must be live.
enum PerfsegStatus perfseg_series_push(struct PerfsegSeries *series,
                                       const struct PerfsegImage *image);

// Number of time-points; 0 for NULL.
//
// # Safety
// `series` must be NULL or a live handle.
size_t perfseg_series_len(const struct PerfsegSeries *series);

// # Safety
// `series` must be NULL or a handle not yet freed.
void perfseg_series_free(struct PerfsegSeries *series);

// Segments one slice series using `ref_timepoint` as the reference image.
//
// # Safety
// `series` must be a live handle; `out` must be writable.
enum PerfsegStatus perfseg_segment_slice(const struct PerfsegSeries *series,
                                         size_t ref_timepoint,
                                         struct PerfsegResult **out);

// Copy of the perfusion ROI mask.
//
// # Safety
// `result` must be a live handle; `out` must be writable.
enum PerfsegStatus perfseg_result_roi_mask(const struct PerfsegResult *result,
                                           struct PerfsegMask **out);

// Copy of the brain mask, before CSF removal.
//
// # Safety
// `result` must be a live handle; `out` must be writable.
enum PerfsegStatus perfseg_result_brain_mask(const struct PerfsegResult *result,
                                             struct PerfsegMask **out);

// Low and high thresholds.
//
// # Safety
// `result` must be a live handle; both outputs must be writable.
enum PerfsegStatus perfseg_result_thresholds(const struct PerfsegResult *result,
                                             double *t_low,
                                             double *t_high);

// Crop box used for the low threshold. `fallback` (may be NULL) is set to
// true when the whole image was used instead.
//
// # Safety
// `result` must be a live handle; `out` must be writable; `fallback` NULL
// or writable.
enum PerfsegStatus perfseg_result_crop_box(const struct PerfsegResult *result,
                                           struct PerfsegCropBox *out,
                                           bool *fallback);

// # Safety
// `result` must be NULL or a handle not yet freed.
void perfseg_result_free(struct PerfsegResult *result);

// Dice index of two same-sized masks.
//
// # Safety
// Both masks must be live handles; `out` must be writable.
enum PerfsegStatus perfseg_dice(const struct PerfsegMask *a,
                                const struct PerfsegMask *b,
                                double *out);

// Confusion counts of `pred` against `reference`.
//
// # Safety
// Both masks must be live handles; `out` must be writable.
enum PerfsegStatus perfseg_confusion(const struct PerfsegMask *pred,
                                     const struct PerfsegMask *reference,
                                     struct PerfsegConfusion *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PERFSEG_H */
