#ifndef SDFTRACK_H
#define SDFTRACK_H

/* Generated by cbindgen from sdftrack-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum StStatus {
  ST_STATUS_OK = 0,
  ST_STATUS_NULL_POINTER = 1,
  ST_STATUS_INVALID_UTF8 = 2,
  ST_STATUS_IO = 3,
  ST_STATUS_PARSE = 4,
  ST_STATUS_INVALID_ARGUMENT = 5,
  ST_STATUS_NO_VALID_PIXELS = 6,
  ST_STATUS_DEGENERATE_QUATERNION = 7,
  ST_STATUS_INTERNAL = 8,
} StStatus;

// Tracking method selector.
typedef enum StMethod {
  ST_METHOD_SDF = 0,
  ST_METHOD_VR = 1,
} StMethod;

// Per-frame budget mode for [`st_track_sequence`].
typedef enum StBudgetMode {
  ST_BUDGET_MODE_FIXED_ITERATIONS = 0,
  ST_BUDGET_MODE_WALL_CLOCK_MS = 1,
} StBudgetMode;

// Opaque scene handle: either an analytic union or a baked grid.
typedef struct StScene StScene;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread. The pointer stays
// valid until the next library call on the same thread.
const char *st_last_error_message(void);

// Library version as a static NUL-terminated string; do not free.
const char *st_version(void);

// Parses a scene description file into an opaque handle.
//
// # Safety
// `path` must be a NUL-terminated string and `out_scene` a valid pointer;
// the returned handle must be released with [`st_scene_free`].
enum StStatus st_scene_load(const char *path, struct StScene **out_scene);

// Bakes an existing scene into a trilinear grid spanning `[min, max]`
// (two 3-vectors) with `dims` nodes per axis (three values, each >= 2).
//
// # Safety
// `scene` must be a live handle; `min`, `max` point to 3 doubles each,
// `dims` to 3 uint32 values, and `out_scene` must be valid.
enum StStatus st_scene_bake(const struct StScene *scene,
                            const double *min,
                            const double *max,
                            const uint32_t *dims,
                            struct StScene **out_scene);

// Queries color and signed distance at a world point. `out_color` receives
// 3 doubles, `out_sdf` one double; `out_out_of_bounds` (nullable) is set to
// 1 when a grid query clamped.
//
// # Safety
// `scene` must be a live handle and the output pointers valid.
enum StStatus st_scene_query(const struct StScene *scene,
                             double x,
                             double y,
                             double z,
                             double *out_color,
                             double *out_sdf,
                             uint8_t *out_out_of_bounds);

// Spatial gradient of the signed distance at a world point; `out_gradient`
// receives 3 doubles.
//
// # Safety
// `scene` must be a live handle and `out_gradient` valid for 3 doubles.
enum StStatus st_scene_gradient(const struct StScene *scene,
                                double x,
                                double y,
                                double z,
                                double *out_gradient);

// Number of `query` calls issued against this handle since creation.
//
// # Safety
// `scene` must be a live handle and `out_count` valid.
enum StStatus st_scene_query_count(const struct StScene *scene, uint64_t *out_count);

// Releases a scene handle. NULL is a no-op.
//
// # Safety
// `scene` must be NULL or a handle returned by this library, not yet freed.
void st_scene_free(struct StScene *scene);

// Tracks a dataset end to end and writes the estimated trajectory in TUM
// format. The dataset's manifest must reference its scene file.
// `config_path` (nullable) supplies tracker hyperparameters; the budget
// arguments override it.
//
// # Safety
// String arguments must be NUL-terminated; `config_path` may be NULL.
enum StStatus st_track_sequence(const char *dataset_dir,
                                enum StMethod method,
                                enum StBudgetMode budget_mode,
                                double budget_value,
                                uint64_t seed,
                                const char *out_tum_path,
                                const char *config_path);

// Computes the ATE RMSE between two TUM trajectory files. `out_failed`
// (nullable) receives 1 when the error exceeds `failure_threshold`.
//
// # Safety
// Path arguments must be NUL-terminated strings; `out_ate_rmse` must be
// valid.
enum StStatus st_ate_rmse(const char *est_path,
                          const char *gt_path,
                          double failure_threshold,
                          double *out_ate_rmse,
                          uint8_t *out_failed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SDFTRACK_H */
