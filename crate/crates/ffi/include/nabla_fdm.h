#ifndef NABLA_FDM_H
#define NABLA_FDM_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result of every call.
typedef enum NfStatus {
  NF_STATUS_OK = 0,
  // A required pointer was null.
  NF_STATUS_NULL_ARGUMENT = 1,
  // An argument is outside its domain or lengths disagree.
  NF_STATUS_INVALID_ARGUMENT = 2,
  // Malformed text or an unusable configuration.
  NF_STATUS_CONFIG = 3,
  // Fitting or simulation broke down numerically.
  NF_STATUS_NUMERIC = 4,
  // The caller's output buffer is too short; the message gives the needed length.
  NF_STATUS_BUFFER_TOO_SMALL = 5,
  // Internal panic; the library state is still usable.
  NF_STATUS_PANIC = 6,
} NfStatus;

// A fitted rational approximant.
typedef struct NfApproximant NfApproximant;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// Valid until the next call on the same thread.
const char *nf_last_error(void);

// Fits `1/s^alpha` with `order + 1` poles on `samples` log-spaced
// frequencies over `[omega_l, omega_h]`.
//
// # Safety
// `out` must be valid for one pointer write.
enum NfStatus nf_fit_operator(double alpha,
                              double omega_l,
                              double omega_h,
                              size_t samples,
                              size_t order,
                              size_t iterations,
                              struct NfApproximant **out);

// Like [`nf_fit_operator`] with a pole at `s = 0` and `order` further poles.
//
// # Safety
// `out` must be valid for one pointer write.
enum NfStatus nf_fit_with_integrator(double alpha,
                                     double omega_l,
                                     double omega_h,
                                     size_t samples,
                                     size_t order,
                                     size_t iterations,
                                     struct NfApproximant **out);

// Builds an approximant from `len` poles and residues given as split real
// and imaginary parts.
//
// # Safety
// The four arrays must hold `len` values each; `out` must be writable.
enum NfStatus nf_approximant_new(double alpha,
                                 const double *pole_re,
                                 const double *pole_im,
                                 const double *residue_re,
                                 const double *residue_im,
                                 size_t len,
                                 bool has_integrator,
                                 struct NfApproximant **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `ap` must come from this library and not be used afterwards.
void nf_approximant_free(struct NfApproximant *ap);

// Number of poles, integrator included.
//
// # Safety
// `ap` must be a live handle and `out` writable.
enum NfStatus nf_approximant_len(const struct NfApproximant *ap, size_t *out);

// Fractional order, sample-space fit error `J` and integrator flag.
//
// # Safety
// `ap` must be a live handle; each non-null output must be writable.
enum NfStatus nf_approximant_info(const struct NfApproximant *ap,
                                  double *alpha,
                                  double *fit_error,
                                  bool *has_integrator);

// Copies the `ω_i` (pole at `-ω_i`) into two arrays of capacity `cap`.
//
// # Safety
// `ap` must be a live handle; `re` and `im` must hold `cap` values.
enum NfStatus nf_approximant_poles(const struct NfApproximant *ap,
                                   double *re,
                                   double *im,
                                   size_t cap);

// Copies the residues `c_i` into two arrays of capacity `cap`.
//
// # Safety
// As [`nf_approximant_poles`].
enum NfStatus nf_approximant_residues(const struct NfApproximant *ap,
                                      double *re,
                                      double *im,
                                      size_t cap);

// Evaluates the approximant at `s = s_re + j·s_im`.
//
// # Safety
// `ap` must be a live handle; `out_re` and `out_im` writable.
enum NfStatus nf_approximant_eval(const struct NfApproximant *ap,
                                  double s_re,
                                  double s_im,
                                  double *out_re,
                                  double *out_im);

// Serializes to TOML. Release the string with [`nf_string_free`].
//
// # Safety
// `ap` must be a live handle and `out` writable.
enum NfStatus nf_approximant_to_toml(const struct NfApproximant *ap, char **out);

// Parses the TOML written by [`nf_approximant_to_toml`].
//
// # Safety
// `text` must be a NUL-terminated string; `out` writable.
enum NfStatus nf_approximant_from_toml(const char *text, struct NfApproximant **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void nf_string_free(char *s);

// `len` samples `f(a) .. f(a+len-1)` in, the same instants of the
// fractional sum of order `alpha` out.
//
// # Safety
// `values` and `out` must hold `len` values.
enum NfStatus nf_frac_sum(int64_t a, const double *values, size_t len, double alpha, double *out);

// Caputo difference of order `0 < alpha < 1`, same layout as [`nf_frac_sum`].
//
// # Safety
// `values` and `out` must hold `len` values.
enum NfStatus nf_caputo_diff(int64_t a,
                             const double *values,
                             size_t len,
                             double alpha,
                             double *out);

// Drives the approximant from rest with `u(a) .. u(a+len-1)`; `out(a) = 0`.
//
// # Safety
// `ap` must be a live handle; `u` and `out` must hold `len` values.
enum NfStatus nf_simulate_operator(const struct NfApproximant *ap,
                                   int64_t a,
                                   const double *u,
                                   size_t len,
                                   double *out);

// Pseudo-state of `∇^α x(k) = -lambda·x(k) + u(k)`, `x(a) = x0`, stepped
// with the approximant (its order is the system order). `x0 ≠ 0` needs an
// integrator approximant.
//
// # Safety
// `ap` must be a live handle; `u` and `out` must hold `len` values.
enum NfStatus nf_simulate_linear(const struct NfApproximant *ap,
                                 double lambda,
                                 double x0,
                                 int64_t a,
                                 const double *u,
                                 size_t len,
                                 double *out);

// Reference solution of the same system from the defining sums.
//
// # Safety
// `u` and `out` must hold `len` values.
enum NfStatus nf_exact_linear(double alpha,
                              double lambda,
                              double x0,
                              int64_t a,
                              const double *u,
                              size_t len,
                              double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NABLA_FDM_H */
