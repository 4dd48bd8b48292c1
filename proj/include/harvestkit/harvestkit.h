/* C interface to the picking/evaluation toolkit. All functions return a
 * status code; on failure hk_last_error() describes the problem for the
 * calling thread. Strings returned through char** outputs are heap-allocated
 * and must be released with hk_string_free(). */
#ifndef HARVESTKIT_H
#define HARVESTKIT_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hk_status {
    HK_OK = 0,
    HK_INVALID_ARGUMENT = 1,
    HK_SHAPE_MISMATCH = 2,
    HK_PARSE_ERROR = 3,
    HK_IO_ERROR = 4,
    HK_EMPTY_MASK = 5,
    HK_INVALID_DEPTH = 6,
    HK_BEHIND_CAMERA = 7,
    HK_RANGE_ERROR = 8,
    HK_CONSISTENCY_ERROR = 9,
    HK_DEGENERATE_INPUT = 10,
    HK_GENERATION_ERROR = 11,
    HK_VALIDATION_ERROR = 12,
    HK_EVALUATION_ERROR = 13,
    HK_INTERNAL_ERROR = 14
} hk_status;

/* Message for the most recent failure on this thread; never NULL. */
const char* hk_last_error(void);
const char* hk_status_name(hk_status status);
void hk_string_free(char* s);

/* ---- masks ------------------------------------------------------------- */

typedef struct hk_mask hk_mask;

hk_status hk_mask_load_pgm(const char* path, hk_mask** out);
/* data: width*height bytes, row-major; nonzero = foreground. */
hk_status hk_mask_from_bytes(const unsigned char* data, int width, int height, hk_mask** out);
void hk_mask_free(hk_mask* mask);
hk_status hk_mask_dims(const hk_mask* mask, int* width, int* height);

/* Clearance-maximizing foreground pixel; ties go to the smallest row, then
 * the smallest column. clearance is the Euclidean distance to background. */
hk_status hk_picking_point(const hk_mask* mask, int* x, int* y, double* clearance);
hk_status hk_mask_iou(const hk_mask* a, const hk_mask* b, double* iou);

/* ---- calibration and depth ---------------------------------------------- */

typedef struct hk_calibration hk_calibration;
typedef struct hk_depth_map hk_depth_map;

hk_status hk_calibration_load(const char* path, hk_calibration** out);
void hk_calibration_free(hk_calibration* calib);
hk_status hk_depth_load_pgm(const char* path, hk_depth_map** out);
void hk_depth_free(hk_depth_map* depth);

/* Picking point -> camera ray -> metric camera point -> robot base frame.
 * JSON: {"x","y","clearance","camera":[x,y,z],"base":[x,y,z]} */
hk_status hk_locate_json(const hk_mask* mask, const hk_depth_map* depth,
                         const hk_calibration* calib, char** out_json);

/* ---- planning ----------------------------------------------------------- */

/* Grasp plan around a base-frame target plus a normalized quintic schedule.
 * orientation_rpy is extrinsic X-Y-Z Euler, radians. */
hk_status hk_grasp_plan_json(const double target_base[3], const double orientation_rpy[3],
                             double enclose_offset, double safety_margin,
                             double duration_seconds, char** out_json);

/* ---- evaluation --------------------------------------------------------- */

hk_status hk_evaluate_files(const char* annotations_path, const char* predictions_path,
                            int by_occlusion, int workers, char** out_json);
hk_status hk_harvest_report_json(const char* log_json_text, char** out_json);
hk_status hk_correlate(const double* x, const double* y, size_t n, double* r2);

/* ---- data tooling -------------------------------------------------------- */

/* Writes scene.pgm, per-fruit amodal/visible mask PGMs, and scene.json into
 * out_dir; returns the manifest JSON. */
hk_status hk_synth(const char* out_dir, const double* target_ratios, size_t n_ratios,
                   int width, int height, unsigned long long seed, char** out_json);

/* Augments one annotated image; writes variant PGMs plus a combined
 * annotation document into out_dir and returns a manifest JSON. */
hk_status hk_augment_files(const char* image_path, const char* annotations_path,
                           int image_id, const char* out_dir, int variants,
                           unsigned long long seed, char** out_json);

/* Gradient/shape self-verification; JSON lists each check. *all_passed is
 * set to 1 when every check passed, else 0. */
hk_status hk_nn_check(unsigned long long seed, int* all_passed, char** out_json);

/* Write-to-temp-then-rename; the destination never holds partial output. */
hk_status hk_write_text_file(const char* path, const char* text);

#ifdef __cplusplus
}
#endif

#endif /* HARVESTKIT_H */
