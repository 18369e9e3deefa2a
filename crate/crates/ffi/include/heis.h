#ifndef HEIS_H
#define HEIS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum HeisStatus {
  HEIS_STATUS_OK = 0,
  HEIS_STATUS_NULL_POINTER = 1,
  HEIS_STATUS_PARSE = 2,
  HEIS_STATUS_DOMAIN = 3,
  HEIS_STATUS_SINGULAR = 4,
  HEIS_STATUS_NOT_CONTACT = 5,
  HEIS_STATUS_NOT_POSITIVE = 6,
  HEIS_STATUS_INTERNAL = 7,
  HEIS_STATUS_PANIC = 8,
} HeisStatus;

/**
 * Opaque parsed map.
 */
typedef struct HeisMap HeisMap;

typedef struct HeisPoint {
  double x;
  double y;
  double t;
} HeisPoint;

typedef struct HeisComplex {
  double re;
  double im;
} HeisComplex;

/**
 * Pointwise contact data; `mu_defined` is 0 where `ZF = 0`.
 */
typedef struct HeisContact {
  struct HeisPoint image;
  double lambda;
  double r1;
  double r2;
  struct HeisComplex r_z;
  struct HeisComplex zf;
  struct HeisComplex zbar_f;
  struct HeisComplex mu;
  int32_t mu_defined;
  double distortion;
  int32_t orientation;
  int32_t is_contact;
  int32_t is_conformal;
} HeisContact;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call into the library on this thread.
 */
const char *heis_last_error(void);

/**
 * Parses a map spec such as `inv∘tr(1,0,0)` or `flow(h=exp(x),s=0.5)`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HeisStatus heis_map_parse(const char *spec, struct HeisMap **out);

/**
 * Releases a handle from [`heis_map_parse`]; null is ignored.
 *
 * # Safety
 * `map` must come from [`heis_map_parse`] and not be freed twice.
 */
void heis_map_free(struct HeisMap *map);

/**
 * 1 when contact of the map is guaranteed by construction, 0 otherwise
 * (an `expr(...)` or `grad(...)` segment is present), -1 for null.
 *
 * # Safety
 * `map` must be null or a live handle.
 */
int32_t heis_map_contact_assumed(const struct HeisMap *map);

/**
 * # Safety
 * `map` must be a live handle and `out` a valid pointer.
 */
enum HeisStatus heis_map_apply(const struct HeisMap *map,
                               struct HeisPoint p,
                               struct HeisPoint *out);

/**
 * CR Schwarzian at `p`; fails with `NotContact` off contact maps.
 *
 * # Safety
 * `map` must be a live handle and `out` a valid pointer.
 */
enum HeisStatus heis_s_cr(const struct HeisMap *map, struct HeisPoint p, struct HeisComplex *out);

/**
 * Classical-type Schwarzian at `p`.
 *
 * # Safety
 * `map` must be a live handle and `out` a valid pointer.
 */
enum HeisStatus heis_s_cl(const struct HeisMap *map, struct HeisPoint p, struct HeisComplex *out);

/**
 * Pre-Schwarzian `Pf = Z ln λ` at `p`.
 *
 * # Safety
 * `map` must be a live handle and `out` a valid pointer.
 */
enum HeisStatus heis_preschwarzian(const struct HeisMap *map,
                                   struct HeisPoint p,
                                   struct HeisComplex *out);

/**
 * # Safety
 * `map` must be a live handle and `out` a valid pointer.
 */
enum HeisStatus heis_assess_contact(const struct HeisMap *map,
                                    struct HeisPoint p,
                                    struct HeisContact *out);

struct HeisPoint heis_group_mul(struct HeisPoint p, struct HeisPoint q);

struct HeisPoint heis_group_inv(struct HeisPoint p);

double heis_koranyi_norm(struct HeisPoint p);

/**
 * Runs the constants ledger and returns it as a JSON string; release with
 * [`heis_string_free`].
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum HeisStatus heis_ledger_json(char **out);

/**
 * Releases a string returned by the library; null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void heis_string_free(char *s);

/**
 * Library version, static storage.
 */
const char *heis_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEIS_H */
