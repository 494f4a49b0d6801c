#ifndef MOPCHR_H
#define MOPCHR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// State of one lattice cell.
typedef enum MopchrCellStatus {
  MOPCHR_CELL_STATUS_NORMAL = 0,
  MOPCHR_CELL_STATUS_BOUNDARY = 1,
  MOPCHR_CELL_STATUS_PARTIAL = 2,
  MOPCHR_CELL_STATUS_BREAKDOWN = 3,
  // Outside the filled region.
  MOPCHR_CELL_STATUS_ABSENT = 4,
} MopchrCellStatus;

// Result code of every call.
typedef enum MopchrStatus {
  MOPCHR_STATUS_OK = 0,
  // A required pointer argument was null.
  MOPCHR_STATUS_NULL_ARGUMENT = 1,
  // Malformed input: bad shorthand, bad UTF-8, index of the wrong rank.
  MOPCHR_STATUS_INVALID_ARGUMENT = 2,
  // Parameters outside a family's admissible range.
  MOPCHR_STATUS_DOMAIN = 3,
  // Breakdown, singular system, non-normal index or failed convergence.
  MOPCHR_STATUS_NUMERICAL = 4,
  // The operation needs another scalar backend.
  MOPCHR_STATUS_BACKEND = 5,
  // The requested coefficient or cell is not available.
  MOPCHR_STATUS_NOT_FOUND = 6,
  // The output buffer is too small; the needed length is reported.
  MOPCHR_STATUS_BUFFER_TOO_SMALL = 7,
  // A Rust panic was caught at the boundary.
  MOPCHR_STATUS_INTERNAL = 8,
} MopchrStatus;

// Filled nearest-neighbour recurrence coefficients.
typedef struct MopchrLattice MopchrLattice;

// A system of moment functionals, parsed but not yet evaluated.
typedef struct MopchrSystem MopchrSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or an empty string. The
// pointer stays valid until the next call on the same thread.
const char *mopchr_last_error(void);

// Library version as a static NUL-terminated string.
const char *mopchr_version(void);

// Parses a family shorthand such as `charlier:a=1,2` or `@file.json`.
//
// # Safety
// `spec` must be a NUL-terminated string and `out` a valid pointer.
enum MopchrStatus mopchr_system_parse(const char *spec, struct MopchrSystem **out);

// Releases a system. Null is ignored.
//
// # Safety
// `sys` must come from [`mopchr_system_parse`] and not be used afterwards.
void mopchr_system_free(struct MopchrSystem *sys);

// Number of functionals `r`.
//
// # Safety
// `sys` must be a live handle and `out` a valid pointer.
enum MopchrStatus mopchr_system_rank(const struct MopchrSystem *sys, size_t *out);

// Whether the system runs on the exact rational backend.
//
// # Safety
// `sys` must be a live handle and `out` a valid pointer.
enum MopchrStatus mopchr_system_is_exact(const struct MopchrSystem *sys, bool *out);

// Fills the recurrence coefficients for every `|n| ≤ dmax`.
//
// # Safety
// `sys` must be a live handle and `out` a valid pointer.
enum MopchrStatus mopchr_nnrr(const struct MopchrSystem *sys,
                              size_t dmax,
                              struct MopchrLattice **out);

// Coefficients of `Φν` for `Φ` given as `roots=5,7;mults=1,2` (real
// rational roots), up to `|k| ≤ dmax`. Cells past a breakdown are marked,
// and their count is available from [`mopchr_lattice_breakdowns`].
//
// # Safety
// `sys` must be a live handle, `phi` a NUL-terminated string and `out` a
// valid pointer.
enum MopchrStatus mopchr_transform(const struct MopchrSystem *sys,
                                   const char *phi,
                                   size_t dmax,
                                   struct MopchrLattice **out);

// Releases a lattice. Null is ignored.
//
// # Safety
// `lat` must come from this library and not be used afterwards.
void mopchr_lattice_free(struct MopchrLattice *lat);

// Rank, depth and whether the values are exact.
//
// # Safety
// `lat` must be a live handle; each output pointer may be null.
enum MopchrStatus mopchr_lattice_info(const struct MopchrLattice *lat,
                                      size_t *rank,
                                      size_t *dmax,
                                      bool *exact);

// Number of recorded breakdowns.
//
// # Safety
// `lat` must be a live handle and `out` a valid pointer.
enum MopchrStatus mopchr_lattice_breakdowns(const struct MopchrLattice *lat, size_t *out);

// Status of cell `n` (`len` must equal the rank).
//
// # Safety
// `lat` must be a live handle, `n` must point to `len` values and `out`
// must be valid.
enum MopchrStatus mopchr_lattice_cell(const struct MopchrLattice *lat,
                                      const size_t *n,
                                      size_t len,
                                      enum MopchrCellStatus *out);

// `a_{n,j}` as a double.
//
// # Safety
// As for [`mopchr_lattice_cell`].
enum MopchrStatus mopchr_lattice_a(const struct MopchrLattice *lat,
                                   const size_t *n,
                                   size_t len,
                                   size_t j,
                                   double *out);

// `b_{n,j}` as a double.
//
// # Safety
// As for [`mopchr_lattice_cell`].
enum MopchrStatus mopchr_lattice_b(const struct MopchrLattice *lat,
                                   const size_t *n,
                                   size_t len,
                                   size_t j,
                                   double *out);

// `a_{n,j}` (`which_b` false) or `b_{n,j}` as an exact `"p/q"` string.
// Needs an exact lattice. Release the string with [`mopchr_string_free`].
//
// # Safety
// As for [`mopchr_lattice_cell`].
enum MopchrStatus mopchr_lattice_exact(const struct MopchrLattice *lat,
                                       const size_t *n,
                                       size_t len,
                                       size_t j,
                                       bool which_b,
                                       char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void mopchr_string_free(char *s);

// Coefficients of the type II polynomial `P_n`, constant term first, as
// doubles. `*needed` is set to `|n| + 1`; if `cap` is smaller the call
// returns `BufferTooSmall` and writes nothing.
//
// # Safety
// `lat` must be a live handle, `n` must point to `len` values, `buf` to
// `cap` writable doubles (may be null when `cap` is 0) and `needed` must be
// valid.
enum MopchrStatus mopchr_type2_coeffs(const struct MopchrLattice *lat,
                                      const size_t *n,
                                      size_t len,
                                      double *buf,
                                      size_t cap,
                                      size_t *needed);

// Runs the command-line interface with `argv[0..argc]` and returns its exit
// code (0 pass, 1 check failure, 2 bad input). Output goes to stdout.
//
// # Safety
// `argv` must point to `argc` NUL-terminated strings.
int mopchr_cli_main(int argc, const char *const *argv);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOPCHR_H */
