#ifndef ANISOTV_H
#define ANISOTV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes. The nonzero values match the exit codes of the CLI where
// the two overlap.
typedef enum AnisotvStatus {
  ANISOTV_STATUS_OK = 0,
  ANISOTV_STATUS_IO = 1,
  ANISOTV_STATUS_PARSE = 2,
  ANISOTV_STATUS_NON_CONVERGENCE = 3,
  ANISOTV_STATUS_AUDIT_VIOLATION = 4,
  ANISOTV_STATUS_INVALID = 5,
  ANISOTV_STATUS_NULL_ARGUMENT = 6,
  ANISOTV_STATUS_PANIC = 7,
} AnisotvStatus;

// Opaque weighted graph.
typedef struct AnisotvGraph AnisotvGraph;

// Opaque ROF solution.
typedef struct AnisotvSolution AnisotvSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *anisotv_last_error(void);

// Builds a graph with `n_vertices` vertices and `n_edges` edges
// `tails[k] -> heads[k]`.
//
// # Safety
// Array arguments must point to at least as many elements as their
// length argument; `out` must be writable.
enum AnisotvStatus anisotv_graph_new(uintptr_t n_vertices,
                                     const double *vertex_weights,
                                     uintptr_t n_edges,
                                     const uintptr_t *tails,
                                     const uintptr_t *heads,
                                     const double *edge_weights,
                                     struct AnisotvGraph **out);

// Reads a graph file (`n m` header, vertex weights, then `i j W` lines).
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum AnisotvStatus anisotv_graph_load(const char *path, struct AnisotvGraph **out);

// # Safety
// `g` must be null or a handle from this library not yet freed.
void anisotv_graph_free(struct AnisotvGraph *g);

// # Safety
// `g` must be a live handle.
uintptr_t anisotv_graph_vertex_count(const struct AnisotvGraph *g);

// # Safety
// `g` must be a live handle.
uintptr_t anisotv_graph_edge_count(const struct AnisotvGraph *g);

// Weighted divergence of the edge field `h` (one value per edge) into
// `out` (one value per vertex).
//
// # Safety
// `h` and `out` must hold the edge and vertex counts of `g`.
enum AnisotvStatus anisotv_divergence(const struct AnisotvGraph *g, const double *h, double *out);

// # Safety
// `u` must hold the vertex count of `g`; `out` must be writable.
enum AnisotvStatus anisotv_total_variation(const struct AnisotvGraph *g,
                                           const double *u,
                                           double *out);

// Solves ROF on `g` with datum `f`. When the tolerance is not reached the
// status is `NonConvergence` and `out` still receives the best iterate.
//
// # Safety
// `f` must hold the vertex count of `g`; `out` must be writable.
enum AnisotvStatus anisotv_solve_rof(const struct AnisotvGraph *g,
                                     const double *f,
                                     double alpha,
                                     double tol,
                                     uintptr_t max_iter,
                                     struct AnisotvSolution **out);

// # Safety
// `s` must be null or a handle from this library not yet freed.
void anisotv_solution_free(struct AnisotvSolution *s);

// Number of vertex values in the primal solution.
//
// # Safety
// `s` must be a live handle.
uintptr_t anisotv_solution_len(const struct AnisotvSolution *s);

// Number of edge values in the dual field.
//
// # Safety
// `s` must be a live handle.
uintptr_t anisotv_solution_dual_len(const struct AnisotvSolution *s);

// Copies the primal solution into `out`, which holds `len` values.
//
// # Safety
// `out` must point to `len` writable doubles.
enum AnisotvStatus anisotv_solution_primal(const struct AnisotvSolution *s,
                                           double *out,
                                           uintptr_t len);

// Copies the dual edge field into `out`, which holds `len` values.
//
// # Safety
// `out` must point to `len` writable doubles.
enum AnisotvStatus anisotv_solution_dual(const struct AnisotvSolution *s,
                                         double *out,
                                         uintptr_t len);

// # Safety
// `s` must be a live handle.
double anisotv_solution_gap(const struct AnisotvSolution *s);

// # Safety
// `s` must be a live handle.
double anisotv_solution_relative_gap(const struct AnisotvSolution *s);

// # Safety
// `s` must be a live handle.
uintptr_t anisotv_solution_iterations(const struct AnisotvSolution *s);

// Exact ROF minimiser on the chain `0 - 1 - ... - n-1`. `edge_weights`
// holds `n - 1` values; `out` receives `n`.
//
// # Safety
// Arrays must hold the stated number of elements.
enum AnisotvStatus anisotv_solve_chain(uintptr_t n,
                                       const double *f,
                                       const double *vertex_weights,
                                       const double *edge_weights,
                                       double alpha,
                                       double *out);

// Solves ROF and compares the minimiser against `n_samples` competitors
// under every probe. `worst` receives the largest violation relative to
// its probe scale; the status is `AuditViolation` when it exceeds `tol`.
//
// # Safety
// `f` must hold the vertex count of `g`; `worst` may be null.
enum AnisotvStatus anisotv_audit(const struct AnisotvGraph *g,
                                 const double *f,
                                 double alpha,
                                 uintptr_t n_samples,
                                 uint64_t seed,
                                 double tol,
                                 double *worst);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANISOTV_H */
