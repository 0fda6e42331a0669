#ifndef PHOTONLOC_H
#define PHOTONLOC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum PlDensityKind {
  PL_DENSITY_KIND_LANDAU_PEIERLS = 0,
  PL_DENSITY_KIND_BIORTHONORMAL = 1,
} PlDensityKind;

// Result code of every fallible call; `PL_STATUS_OK` is zero.
typedef enum PlStatus {
  PL_STATUS_OK = 0,
  PL_STATUS_NULL_POINTER = 1,
  PL_STATUS_INVALID_ARGUMENT = 2,
  PL_STATUS_CONFIG = 3,
  PL_STATUS_SINGULAR_POINT = 4,
  PL_STATUS_MODE_NOT_ON_LATTICE = 5,
  PL_STATUS_MISSING_SECTOR = 6,
  PL_STATUS_NOT_APPLICABLE = 7,
  PL_STATUS_STATE_FILE = 8,
  PL_STATUS_IO = 9,
  PL_STATUS_PARSE = 10,
  PL_STATUS_BUFFER_TOO_SMALL = 11,
  PL_STATUS_PANIC = 12,
} PlStatus;

// Opaque lattice handle.
typedef struct PlLattice PlLattice;

// Opaque state handle.
typedef struct PlState PlState;

typedef struct PlNormComponents {
  double vacuum;
  double one;
  double two;
} PlNormComponents;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message (NUL-terminated, truncated
// to `len`) and returns the full message length without the terminator.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t pl_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *pl_version(void);

// # Safety
// `out` must be a valid pointer to a handle slot.
enum PlStatus pl_lattice_new(double box_l, size_t n, bool exclude_z_axis, struct PlLattice **out);

// # Safety
// `lattice` must be null or a handle from `pl_lattice_new` not yet freed.
void pl_lattice_free(struct PlLattice *lattice);

// Number of nonzero wave vectors.
//
// # Safety
// `lattice` must be a live handle; `out` a valid pointer.
enum PlStatus pl_lattice_mode_count(const struct PlLattice *lattice, size_t *out);

// Volume `L³` and number of conjugate grid points `N³`.
//
// # Safety
// `lattice` must be a live handle; outputs valid pointers.
enum PlStatus pl_lattice_geometry(const struct PlLattice *lattice, double *volume, size_t *points);

// Writes the conjugate grid as `x, y, z` triples (`3·N³` doubles).
//
// # Safety
// `out` must point to `len` writable doubles.
enum PlStatus pl_lattice_grid(const struct PlLattice *lattice, double *out, size_t len);

// Empty state (all coefficients zero) on a copy of `lattice`.
//
// # Safety
// `lattice` must be a live handle; `out` a valid pointer.
enum PlStatus pl_state_new(const struct PlLattice *lattice,
                           double hbar,
                           double c,
                           double eps0,
                           struct PlState **out);

// Parses a state document.
//
// # Safety
// `json` must be NUL-terminated; `out` a valid pointer.
enum PlStatus pl_state_from_json(const char *json, struct PlState **out);

// Loads a state file.
//
// # Safety
// `path` must be NUL-terminated; `out` a valid pointer.
enum PlStatus pl_state_load(const char *path, struct PlState **out);

// # Safety
// `state` must be null or a live handle.
void pl_state_free(struct PlState *state);

// Canonical JSON of the state. Writes at most `len` bytes including the
// terminator and stores the full length (without terminator) in `needed`;
// returns `BufferTooSmall` when truncated.
//
// # Safety
// `buf` must be null or point to `len` writable bytes; `needed` valid.
enum PlStatus pl_state_to_json(const struct PlState *state, char *buf, size_t len, size_t *needed);

// Sets `c_{n,λ}`.
//
// # Safety
// `state` must be a live handle; `n` points to three ints.
enum PlStatus pl_state_set_one(struct PlState *state,
                               const int32_t *n,
                               int32_t helicity_value,
                               double re,
                               double im);

// Sets the two-photon coefficient of the unordered pair `{(a, λa), (b, λb)}`.
//
// # Safety
// `state` must be a live handle; `a` and `b` point to three ints each.
enum PlStatus pl_state_set_two(struct PlState *state,
                               const int32_t *a,
                               int32_t helicity_a,
                               const int32_t *b,
                               int32_t helicity_b,
                               double re,
                               double im);

// # Safety
// `state` must be a live handle; `out` a valid pointer.
enum PlStatus pl_state_norm_components(const struct PlState *state, struct PlNormComponents *out);

// `Ψ^(α)(r, t)` on the conjugate grid: per point `re_x, im_x, re_y, im_y,
// re_z, im_z` (`6·N³` doubles, grid order of `pl_lattice_grid`).
//
// # Safety
// `state` must be a live handle; `out` points to `len` writable doubles.
enum PlStatus pl_wavefunction(const struct PlState *state,
                              double alpha,
                              int32_t gauge_m,
                              double t,
                              double *out,
                              size_t len);

// Density on the conjugate grid (`N³` doubles).
//
// # Safety
// `state` must be a live handle; `out` points to `len` writable doubles.
enum PlStatus pl_density(const struct PlState *state,
                         enum PlDensityKind kind,
                         int32_t gauge_m,
                         double t,
                         double *out,
                         size_t len);

// Closed-form two-mode density for parallel lattice modes `n1`, `n2`.
//
// # Safety
// `lattice` must be a live handle; `n1`, `n2` point to three ints, `r` to
// three doubles; `out` valid.
enum PlStatus pl_two_mode_closed_form(const struct PlLattice *lattice,
                                      const int32_t *n1,
                                      const int32_t *n2,
                                      const double *r,
                                      double t,
                                      double c,
                                      double *out);

// `Ψ_{i,j}^(α)(r, r′, t, t′)` as `(re, im)`.
//
// # Safety
// `state` must be a live handle; `r`, `r2` point to three doubles; `out`
// to two writable doubles.
enum PlStatus pl_two_photon_amplitude(const struct PlState *state,
                                      double alpha,
                                      int32_t gauge_m,
                                      const double *r,
                                      const double *r2,
                                      double t,
                                      double t2,
                                      size_t i,
                                      size_t j,
                                      double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHOTONLOC_H */
