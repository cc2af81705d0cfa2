#ifndef LIQUID_DROP_H
#define LIQUID_DROP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum LdStatus {
  LD_STATUS_OK = 0,
  LD_STATUS_NULL_POINTER = 1,
  LD_STATUS_INVALID_ARGUMENT = 2,
  LD_STATUS_INVALID_BODY = 3,
  LD_STATUS_DOMAIN = 4,
  LD_STATUS_RADIAL_DEGENERACY = 5,
  LD_STATUS_RAY_EXIT = 6,
  LD_STATUS_IO = 7,
  LD_STATUS_PARSE = 8,
  LD_STATUS_PANIC = 9,
} LdStatus;

/**
 * Opaque body handle.
 */
typedef struct LdBody LdBody;

/**
 * Value with its standard error; `samples` is 0 for closed forms.
 */
typedef struct LdEstimate {
  double value;
  double std_error;
  uint64_t samples;
} LdEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ld_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into the library from this thread.
 */
const char *ld_last_error(void);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum LdStatus ld_body_ball(double radius, struct LdBody **out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum LdStatus ld_body_ellipsoid(double a, double b, double c, struct LdBody **out);

/**
 * Two disjoint balls with centres `separation` apart.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum LdStatus ld_body_two_balls(double r1, double r2, double separation, struct LdBody **out);

/**
 * Cube mesh of side `side` centred at the origin.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum LdStatus ld_body_cube(double side, size_t subdivisions, struct LdBody **out);

/**
 * Closed triangle mesh read from an OFF file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` valid for writes.
 */
enum LdStatus ld_body_from_off(const char *path, struct LdBody **out);

/**
 * Star shape from a StarShape JSON document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` valid for writes.
 */
enum LdStatus ld_body_from_star_json(const char *json, struct LdBody **out);

/**
 * Releases a body. NULL is ignored.
 *
 * # Safety
 * `body` must come from an `ld_body_*` constructor and not be used again.
 */
void ld_body_free(struct LdBody *body);

/**
 * # Safety
 * `body` must be a live handle and `out` valid for writes.
 */
enum LdStatus ld_body_volume(const struct LdBody *body, struct LdEstimate *out);

/**
 * # Safety
 * `body` must be a live handle and `out` valid for writes.
 */
enum LdStatus ld_body_perimeter(const struct LdBody *body, struct LdEstimate *out);

/**
 * # Safety
 * `body` must be a live handle, `point` must hold 3 doubles and `out` be
 * valid for writes.
 */
enum LdStatus ld_body_contains(const struct LdBody *body, const double *point, bool *out);

/**
 * Distance from the interior point `origin` to the boundary along `dir`.
 *
 * # Safety
 * `body` must be a live handle, `origin` and `dir` must hold 3 doubles
 * each and `out` be valid for writes.
 */
enum LdStatus ld_body_ray_exit(const struct LdBody *body,
                               const double *origin,
                               const double *dir,
                               double *out);

/**
 * Coulomb self-energy `½∬|x − y|⁻¹`.
 *
 * # Safety
 * `body` must be a live handle and `out` valid for writes.
 */
enum LdStatus ld_coulomb_energy(const struct LdBody *body,
                                size_t samples,
                                uint64_t seed,
                                struct LdEstimate *out);

/**
 * Boundary interaction energy `∫_{∂Ω} v_Ω`.
 *
 * # Safety
 * `body` must be a live handle and `out` valid for writes.
 */
enum LdStatus ld_boundary_interaction(const struct LdBody *body,
                                      size_t samples,
                                      uint64_t seed,
                                      struct LdEstimate *out);

/**
 * Full energy report as JSON.
 *
 * # Safety
 * `body` must be a live handle and `out` valid for writes.
 */
enum LdStatus ld_energy_report_json(const struct LdBody *body,
                                    size_t samples,
                                    uint64_t seed,
                                    char **out);

/**
 * Stationarity report as JSON.
 *
 * # Safety
 * `body` must be a live handle and `out` valid for writes.
 */
enum LdStatus ld_stationarity_json(const struct LdBody *body,
                                   size_t samples,
                                   uint64_t seed,
                                   char **out);

/**
 * Runs one scalar chain (`outer-min`, `roundness`, `binding` or
 * `two-ball`) at `volume`, writing the report as JSON and its verdict.
 *
 * # Safety
 * `chain` must be a NUL-terminated string; `out` and `verdict` must be
 * valid for writes.
 */
enum LdStatus ld_proofcheck_json(const char *chain, double volume, char **out, bool *verdict);

/**
 * `4πR² + 16π²R⁵/15` for the ball of volume `volume`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum LdStatus ld_ball_profile(double volume, double *out);

/**
 * Volume above which two balls of half the volume have less energy.
 */
double ld_splitting_threshold(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used again.
 */
void ld_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIQUID_DROP_H */
