#ifndef AGLAB_H
#define AGLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every call.
 */
typedef enum AglabStatus {
  AGLAB_STATUS_OK = 0,
  AGLAB_STATUS_NULL_POINTER = 1,
  AGLAB_STATUS_INVALID_ARGUMENT = 2,
  /*
   `λ ≤ 0`: the bound is vacuous.
   */
  AGLAB_STATUS_VACUOUS_BOUND = 3,
  /*
   Requested more eigenvalues or a larger index than the graph has.
   */
  AGLAB_STATUS_OUT_OF_RANGE = 4,
  /*
   Graph or input too large for the dense path.
   */
  AGLAB_STATUS_TOO_LARGE = 5,
  /*
   Eigensolver or linear-solve failure.
   */
  AGLAB_STATUS_NUMERICAL = 6,
  /*
   A Rust panic was caught; the handle, if any, should be freed.
   */
  AGLAB_STATUS_INTERNAL = 7,
} AglabStatus;

/*
 Opaque graph handle.
 */
typedef struct AglabGraph AglabGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *aglab_version(void);

/*
 Message of the calling thread's most recent failure ("" after success).
 Valid until the next aglab call on the same thread.
 */
const char *aglab_last_error(void);

/*
 `8 alpha / lambda + 16 alpha + 2 (1 - beta) tv`.

 # Safety
 `out` must be valid for one write.
 */
enum AglabStatus aglab_error_bound(double alpha,
                                   double lambda,
                                   double beta,
                                   double tv,
                                   double *out);

/*
 Total-variation distance of two probability vectors of length `len`.

 # Safety
 `p` and `q` must hold `len` doubles; `out` must be valid for one write.
 */
enum AglabStatus aglab_tv_distance(const double *p, const double *q, uintptr_t len, double *out);

/*
 Real-data weight `beta` after replicating `n_real` points `replication` times
 alongside `n_generated` generated points.

 # Safety
 `out` must be valid for one write.
 */
enum AglabStatus aglab_replication_beta(uintptr_t n_real,
                                        uintptr_t n_generated,
                                        uintptr_t replication,
                                        double *out);

/*
 Disk-augmentation graph over grid cells of size `cell_size` for `n`
 equally weighted points (`xy` interleaved `x0, y0, x1, y1, ...`). The grid
 covers every point plus `radius`; labels use the half-plane `x >= 0`.

 # Safety
 `xy` must hold `2 * n` doubles; `out` must be valid for one write.
 */
enum AglabStatus aglab_graph_from_points(const double *xy,
                                         uintptr_t n,
                                         double radius,
                                         double cell_size,
                                         struct AglabGraph **out);

/*
 Unweighted graph joining points at distance at most `eps`; isolated
 points are dropped.

 # Safety
 `xy` must hold `2 * n` doubles; `out` must be valid for one write.
 */
enum AglabStatus aglab_graph_threshold(const double *xy,
                                       uintptr_t n,
                                       double eps,
                                       struct AglabGraph **out);

/*
 Node count (nonzero-degree nodes).

 # Safety
 `g` must be a live handle; `out` must be valid for one write.
 */
enum AglabStatus aglab_graph_node_count(const struct AglabGraph *g, uintptr_t *out);

/*
 Connected components.

 # Safety
 `g` must be a live handle; `out` must be valid for one write.
 */
enum AglabStatus aglab_graph_component_count(const struct AglabGraph *g, uintptr_t *out);

/*
 Writes the `min(capacity, node count)` smallest normalized-Laplacian
 eigenvalues (ascending) to `values` and that count to `written`.

 # Safety
 `g` must be a live handle; `values` must hold `capacity` doubles.
 */
enum AglabStatus aglab_graph_eigenvalues(const struct AglabGraph *g,
                                         double *values,
                                         uintptr_t capacity,
                                         uintptr_t *written);

/*
 The `index`-th smallest eigenvalue, 1-based (`index = k + 1` gives `λ_{k+1}`).

 # Safety
 `g` must be a live handle; `out` must be valid for one write.
 */
enum AglabStatus aglab_graph_lambda(const struct AglabGraph *g, uintptr_t index, double *out);

/*
 `min(λ₂, 2 − λ_N)`.

 # Safety
 `g` must be a live handle; `out` must be valid for one write.
 */
enum AglabStatus aglab_graph_spectral_gap(const struct AglabGraph *g, double *out);

/*
 Releases a handle; null is ignored.

 # Safety
 `g` must be null or a handle not yet freed.
 */
void aglab_graph_free(struct AglabGraph *g);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AGLAB_H */
