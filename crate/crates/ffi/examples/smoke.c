/* Builds a tiny two-time-point series, segments it and prints the result.
 *
 *   cargo build -p perfseg-ffi --release
 *   cc crates/ffi/examples/smoke.c -Icrates/ffi/include \
 *      target/release/libperfseg_ffi.a -lpthread -ldl -lm -o smoke
 */
#include <stdio.h>

#include "perfseg.h"

#define W 32
#define H 32

static int check(PerfsegStatus s, const char *what) {
    if (s != PERFSEG_STATUS_OK) {
        fprintf(stderr, "%s failed (%d): %s\n", what, (int)s, perfseg_last_error_message());
        return 1;
    }
    return 0;
}

int main(void) {
    uint16_t pixels[W * H];
    PerfsegSeries *series = NULL;
    PerfsegResult *result = NULL;
    PerfsegMask *roi = NULL;
    double t_low, t_high;

    printf("perfseg %s\n", perfseg_version());
    if (check(perfseg_series_new(0, &series), "series_new")) return 1;
    for (int t = 0; t < 2; t++) {
        PerfsegImage *img = NULL;
        for (int y = 0; y < H; y++)
            for (int x = 0; x < W; x++) {
                int brain = x >= 4 && x < 28 && y >= 4 && y < 28;
                int csf = x >= 12 && x < 18 && y >= 12 && y < 18;
                pixels[y * W + x] = csf ? 2200 : brain ? 900 + (x * 7 + y * 13 + t) % 11 : 30;
            }
        if (check(perfseg_image_new(W, H, pixels, &img), "image_new")) return 1;
        if (check(perfseg_series_push(series, img), "series_push")) return 1;
        perfseg_image_free(img);
    }
    if (check(perfseg_segment_slice(series, 0, &result), "segment_slice")) return 1;
    if (check(perfseg_result_thresholds(result, &t_low, &t_high), "thresholds")) return 1;
    if (check(perfseg_result_roi_mask(result, &roi), "roi_mask")) return 1;
    printf("t_low=%.3f t_high=%.3f roi_pixels=%zu\n", t_low, t_high, perfseg_mask_count(roi));

    perfseg_mask_free(roi);
    perfseg_result_free(result);
    perfseg_series_free(series);
    return perfseg_mask_count(NULL) == 0 ? 0 : 1;
}
