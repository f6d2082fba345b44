#ifndef QKIN_H
#define QKIN_H

/* Generated by cbindgen; edit the Rust source instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum QkinStatus {
  QKIN_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  QKIN_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  QKIN_STATUS_INVALID_UTF8 = 2,
  /**
   * Configuration, schema, or input data was invalid.
   */
  QKIN_STATUS_INVALID_CONFIG = 3,
  /**
   * File system failure.
   */
  QKIN_STATUS_IO = 4,
  /**
   * The simulation exceeded its numeric guards.
   */
  QKIN_STATUS_NUMERIC_DIVERGENCE = 5,
  /**
   * Unexpected internal failure.
   */
  QKIN_STATUS_INTERNAL = 6,
} QkinStatus;

/**
 * Opaque skeleton handle.
 */
typedef struct QkinSkeleton QkinSkeleton;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string. Do not free.
 */
const char *qkin_version(void);

/**
 * Message for the most recent error on this thread, or null if none.
 * Valid until the next failing call on the same thread. Do not free.
 */
const char *qkin_last_error_message(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `ptr` must have been returned through an out-string parameter of this
 * library and not freed before. Null is ignored.
 */
void qkin_string_free(char *ptr);

/**
 * The built-in 24-joint humanoid. Free with [`qkin_skeleton_free`].
 */
struct QkinSkeleton *qkin_skeleton_default(void);

/**
 * Load a skeleton definition from a JSON file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum QkinStatus qkin_skeleton_load(const char *path, struct QkinSkeleton **out);

/**
 * Number of joints, or -1 for a null handle.
 *
 * # Safety
 * `skel` must be null or a live handle from this library.
 */
int32_t qkin_skeleton_joint_count(const struct QkinSkeleton *skel);

/**
 * Destroy a skeleton handle. Null is ignored.
 *
 * # Safety
 * `skel` must have come from this library and not been freed before.
 */
void qkin_skeleton_free(struct QkinSkeleton *skel);

/**
 * Run a full simulation described by a JSON run configuration and return
 * the report (config echo, per-seed metrics, mean and spread) as JSON.
 *
 * # Safety
 * `config_json` must be NUL-terminated; `out_report_json` must be valid.
 * The returned string is freed with [`qkin_string_free`].
 */
enum QkinStatus qkin_simulate_json(const char *config_json, char **out_report_json);

/**
 * Evaluate the metric suite between two pose files (JSON-lines). A null
 * skeleton handle selects the built-in humanoid.
 *
 * # Safety
 * Paths must be NUL-terminated; `out_report_json` must be valid; `skel`
 * must be null or a live handle.
 */
enum QkinStatus qkin_eval_metrics(const char *pred_path,
                                  const char *gt_path,
                                  const struct QkinSkeleton *skel,
                                  char **out_report_json);

/**
 * Generate a synthetic motion from a JSON spec, writing the clean sequence
 * to `clean_path` and, when `references_path` is non-null, the noisy
 * references next to it.
 *
 * # Safety
 * `spec_json` and `clean_path` must be NUL-terminated; `references_path`
 * may be null.
 */
enum QkinStatus qkin_generate(const char *spec_json,
                              const char *clean_path,
                              const char *references_path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QKIN_H */
