#ifndef OMEGALAB_H
#define OMEGALAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Values accepted as the `scheme` argument of
// [`omg_profile_liouville_average`].
typedef enum OmgScheme {
  OMG_SCHEME_CESARO = 0,
  OMG_SCHEME_LOGARITHMIC = 1,
} OmgScheme;

// Result of every fallible call.
typedef enum OmgStatus {
  OMG_STATUS_OK = 0,
  OMG_STATUS_NULL_POINTER = 1,
  OMG_STATUS_INVALID_ARGUMENT = 2,
  OMG_STATUS_INVALID_RANGE = 3,
  OMG_STATUS_RANGE_TOO_LARGE = 4,
  OMG_STATUS_BUFFER_TOO_SMALL = 5,
  OMG_STATUS_IO = 6,
  OMG_STATUS_PANIC = 7,
} OmgStatus;

// `pi_k` counts and per-`k` reciprocal sums at one `N`. Opaque.
typedef struct OmgProfile OmgProfile;

// A configured sieve. Opaque.
typedef struct OmgSieve OmgSieve;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL
// terminated, truncated to `len - 1` bytes) and returns the full message
// length without the NUL. Returns 0 if there is no message.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t omg_last_error_message(char *buf, size_t len);

// Creates a sieve for `1..=limit`. `workers = 0` uses every available core.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum OmgStatus omg_sieve_new(uint64_t limit, uint32_t workers, struct OmgSieve **out);

// Releases a sieve. Null is ignored.
//
// # Safety
// `sieve` must be null or a handle from [`omg_sieve_new`] not yet freed.
void omg_sieve_free(struct OmgSieve *sieve);

// Writes `Omega(n)` for `lo <= n < hi` into `out[0 .. hi - lo]`.
//
// # Safety
// `sieve` must be a live handle; `out` must point to `out_len` writable bytes.
enum OmgStatus omg_sieve_segment(const struct OmgSieve *sieve,
                                 uint64_t lo,
                                 uint64_t hi,
                                 uint8_t *out,
                                 size_t out_len);

// Builds the `Omega` profile of `1..=n`.
//
// # Safety
// `sieve` must be a live handle; `out` must be valid for one handle.
enum OmgStatus omg_sieve_profile(const struct OmgSieve *sieve, uint64_t n, struct OmgProfile **out);

// Releases a profile. Null is ignored.
//
// # Safety
// `profile` must be null or a handle from [`omg_sieve_profile`] not yet freed.
void omg_profile_free(struct OmgProfile *profile);

// The `N` of the profile.
//
// # Safety
// `profile` must be a live handle; `out` must be writable.
enum OmgStatus omg_profile_n(const struct OmgProfile *profile, uint64_t *out);

// Largest `k` with `pi_k(N) > 0`.
//
// # Safety
// `profile` must be a live handle; `out` must be writable.
enum OmgStatus omg_profile_k_max(const struct OmgProfile *profile, uint32_t *out);

// `pi_k(N)`; 0 for `k` past the largest occurring value.
//
// # Safety
// `profile` must be a live handle; `out` must be writable.
enum OmgStatus omg_profile_pi_k(const struct OmgProfile *profile, uint32_t k, uint64_t *out);

// Average of `lambda(n)` over `n <= N` under `scheme` (an [`OmgScheme`]
// value).
//
// # Safety
// `profile` must be a live handle; `out` must be writable.
enum OmgStatus omg_profile_liouville_average(const struct OmgProfile *profile,
                                             uint32_t scheme,
                                             double *out);

// `(1/N) sum_{n <= N} exp(2 pi i beta Omega(n))`.
//
// # Safety
// `profile` must be a live handle; `re` and `im` must be writable.
enum OmgStatus omg_profile_weyl_sum(const struct OmgProfile *profile,
                                    double beta,
                                    double *re,
                                    double *im);

// `(1/N) sum_{3 <= n <= N} F((Omega(n) - log log N) / sqrt(log log N))`
// for `F` the indicator of `[a, b]`, or its linear-ramp smoothing of
// width `ramp` when `ramp > 0`.
//
// # Safety
// `profile` must be a live handle; `out` must be writable.
enum OmgStatus omg_profile_ek_weighted_average(const struct OmgProfile *profile,
                                               double a,
                                               double b,
                                               double ramp,
                                               double *out);

// Standard normal distribution function.
double omg_gaussian_cdf(double x);

// `Omega(n)` by trial division; 0 for `n <= 1`.
uint32_t omg_omega(uint64_t n);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OMEGALAB_H */
