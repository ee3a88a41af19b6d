#ifndef HB_H
#define HB_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

#define HB_OK 0

// A required pointer argument was null.
#define HB_ERR_NULL 1

// A string argument was not valid UTF-8.
#define HB_ERR_UTF8 2

// Malformed JSON or spec, bad grid sizes or other unusable input.
#define HB_ERR_INPUT 3

// The table or path is not a valid strictly convex table.
#define HB_ERR_TABLE 4

// The point lies on the diagonal or too close to the boundary of the annulus.
#define HB_ERR_DOMAIN 5

#define HB_ERR_NO_CONVERGENCE 6

// A computed bound or bracket failed.
#define HB_ERR_CERTIFICATE 7

// A Rust panic was caught at the boundary.
#define HB_ERR_PANIC 8

// A one-parameter family of tables over `s ∈ [0, 1]`.
typedef struct HbPath HbPath;

// A billiard table: a closed strictly convex curve of length 1.
typedef struct HbTable HbTable;

// Lengths of a path and the outcome of `l_H ≤ 4·l_B`.
typedef struct HbCertificate {
  // Hofer length.
  double l_h;
  // Geometric length.
  double l_b;
  // `l_h / l_b`, infinite when `l_b = 0 < l_h`.
  double ratio;
  // 1 when the inequality holds within the tolerance, else 0.
  int32_t pass;
} HbCertificate;

// Copies the last error message of this thread into `buf` (NUL-terminated, truncated
// to `len - 1` bytes) and returns the full message length without the terminator.
// Passing a null `buf` only queries the length.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
uintptr_t hb_last_error(char *buf, uintptr_t len);

// The round table of length 1.
//
// # Safety
// `out` must be a valid pointer; the handle written there must be released with
// `hb_table_free`.
int32_t hb_table_disc(struct HbTable **out);

// Builds a table from a JSON table spec such as `{"type":"fourier_support","c0":1,"cos":[0,0.1]}`.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
int32_t hb_table_from_json(const char *json, struct HbTable **out);

// # Safety
// `t` must be null or a handle from this library that has not been freed.
void hb_table_free(struct HbTable *t);

// The billiard ball map `(q, p) ↦ (Q, P)`, with `q` the arc-length position in `[0, 1)`
// and `p ∈ (-1, 1)` the tangential momentum.
//
// # Safety
// `t` must be a live handle; `out_q` and `out_p` valid pointers.
int32_t hb_forward_map(const struct HbTable *t, double q, double p, double *out_q, double *out_p);

// Inverse of `hb_forward_map`.
//
// # Safety
// As for `hb_forward_map`.
int32_t hb_inverse_map(const struct HbTable *t, double q, double p, double *out_q, double *out_p);

// Euclidean distance between the boundary points at parameters `q` and `big_q`.
//
// # Safety
// `t` must be a live handle and `out` a valid pointer.
int32_t hb_chord_length(const struct HbTable *t, double q, double big_q, double *out);

// `sup_q |γ_a(q) - γ_b(q)|` over the common arc-length parameter.
//
// # Safety
// `a` and `b` must be live handles and `out` a valid pointer.
int32_t hb_c0_distance(const struct HbTable *a, const struct HbTable *b, double *out);

// Builds a path of tables from a JSON path spec such as
// `{"type":"translation","table":{"type":"disc"},"v":[0.1,0]}`.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
int32_t hb_path_from_json(const char *json, struct HbPath **out);

// # Safety
// `p` must be null or a handle from this library that has not been freed.
void hb_path_free(struct HbPath *p);

// Hofer and geometric lengths of a path. `s_nodes` (odd, ≥ 3) is the number of Simpson
// nodes in `s`; `q_grid` and `p_grid` size the Hofer oscillation grid and `length_q_grid`
// the boundary grid of the geometric length. Zero selects the default for that grid.
//
// # Safety
// `path` must be a live handle and `out` a valid pointer.
int32_t hb_hofer_certificate(const struct HbPath *path,
                             uintptr_t s_nodes,
                             uintptr_t q_grid,
                             uintptr_t p_grid,
                             uintptr_t length_q_grid,
                             struct HbCertificate *out);

#endif  /* HB_H */
