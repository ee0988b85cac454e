#ifndef COARSE_LAB_H
#define COARSE_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of an FFI call.
 */
typedef enum CoarseStatus {
  COARSE_STATUS_OK = 0,
  COARSE_STATUS_NULL_POINTER = 1,
  COARSE_STATUS_INVALID_INPUT = 2,
  COARSE_STATUS_PARSE = 3,
  COARSE_STATUS_IO = 4,
  COARSE_STATUS_OUT_OF_RANGE = 5,
  COARSE_STATUS_CHECK_FAILED = 6,
  COARSE_STATUS_PANIC = 7,
} CoarseStatus;

/**
 * A monotone scale → bound table.
 */
typedef struct CoarseControl CoarseControl;

/**
 * A map between two spaces.
 */
typedef struct CoarseMap CoarseMap;

/**
 * A finite metric space.
 */
typedef struct CoarseSpace CoarseSpace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until the
 * next call on the same thread.
 */
const char *coarse_last_error(void);

/**
 * Parses a space from its JSON file format.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum CoarseStatus coarse_space_from_json(const char *json, struct CoarseSpace **out_space);

/**
 * Builds a model space: `family` is `zplus`, `grid2_l1`, `binary_tree`, or
 * `cayley_ball(free2)` style.
 *
 * # Safety
 * `family` must be a NUL-terminated string; `out` must be writable.
 */
enum CoarseStatus coarse_space_generate(const char *family,
                                        size_t size,
                                        struct CoarseSpace **out_space);

/**
 * # Safety
 * `space` must come from this library and not be used afterwards.
 */
void coarse_space_free(struct CoarseSpace *space);

/**
 * # Safety
 * Pointers must be valid.
 */
enum CoarseStatus coarse_space_len(const struct CoarseSpace *space, size_t *len);

/**
 * # Safety
 * Pointers must be valid.
 */
enum CoarseStatus coarse_space_dist(const struct CoarseSpace *space,
                                    size_t i,
                                    size_t j,
                                    double *dist);

/**
 * # Safety
 * Pointers must be valid; `label` NUL-terminated.
 */
enum CoarseStatus coarse_space_index_of(const struct CoarseSpace *space,
                                        const char *label,
                                        size_t *index);

/**
 * Counts metric-axiom violations (exhaustive triangle scan).
 *
 * # Safety
 * Pointers must be valid.
 */
enum CoarseStatus coarse_space_validate(const struct CoarseSpace *space, size_t *violations);

/**
 * Largest step needed to connect the space.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CoarseStatus coarse_connectivity_threshold(const struct CoarseSpace *space, double *c);

/**
 * Cone distance between `(x, i)` and `(y, j)` over `base`; levels start at 1.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CoarseStatus coarse_cone_metric(const struct CoarseSpace *base,
                                     size_t x,
                                     uint32_t i,
                                     size_t y,
                                     uint32_t j,
                                     double *dist);

/**
 * Creates a map from an index table of length `len(source)`.
 *
 * # Safety
 * `table` must hold `len` entries; other pointers must be valid.
 */
enum CoarseStatus coarse_map_new(const struct CoarseSpace *source,
                                 const struct CoarseSpace *target,
                                 const size_t *table,
                                 size_t len,
                                 struct CoarseMap **out_map);

/**
 * # Safety
 * `map` must come from this library and not be used afterwards.
 */
void coarse_map_free(struct CoarseMap *map);

/**
 * `max_x d(f x, g x)`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CoarseStatus coarse_closeness(const struct CoarseMap *f, const struct CoarseMap *g, double *c);

/**
 * Uniformity control of `map` on strictly increasing `scales`.
 *
 * # Safety
 * `scales` must hold `n` entries; other pointers must be valid.
 */
enum CoarseStatus coarse_uniformity_control(const struct CoarseMap *map,
                                            const double *scales,
                                            size_t n,
                                            struct CoarseControl **out_control);

/**
 * Least upper control of `space` at step `c` on `scales`.
 *
 * # Safety
 * `scales` must hold `n` entries; other pointers must be valid.
 */
enum CoarseStatus coarse_upper_control(const struct CoarseSpace *space,
                                       double c,
                                       const double *scales,
                                       size_t n,
                                       struct CoarseControl **out_control);

/**
 * # Safety
 * Pointers must be valid.
 */
enum CoarseStatus coarse_control_len(const struct CoarseControl *control, size_t *len);

/**
 * The `k`-th `(scale, bound)` entry.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CoarseStatus coarse_control_entry(const struct CoarseControl *control,
                                       size_t k,
                                       double *scale,
                                       double *bound);

/**
 * Bound at `query`, snapping up to the next tabulated scale.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CoarseStatus coarse_control_at(const struct CoarseControl *control,
                                    double query,
                                    double *bound);

/**
 * # Safety
 * `control` must come from this library and not be used afterwards.
 */
void coarse_control_free(struct CoarseControl *control);

/**
 * Runs the invariant suite on a tower such as `zplus:64,128,256`. Writes
 * whether every row passed and the CSV report (free with
 * [`coarse_string_free`]).
 *
 * # Safety
 * `tower` must be NUL-terminated; out pointers must be writable.
 */
enum CoarseStatus coarse_suite_run(const char *tower, bool *all_pass, char **csv);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void coarse_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COARSE_LAB_H */
