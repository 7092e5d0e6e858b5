#ifndef GAMMA2_H
#define GAMMA2_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes shared by every fallible call.
 */
enum G2Status
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  /**
   * Success; output parameters are valid.
   */
  G2_STATUS_OK = 0,
  /**
   * A pointer was null or a numeric argument was out of domain.
   */
  G2_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The model or rate function violates a structural precondition.
   */
  G2_STATUS_MODEL = 2,
  /**
   * A numerical routine failed to meet its accuracy contract.
   */
  G2_STATUS_NUMERIC = 3,
  /**
   * Malformed JSON or text input.
   */
  G2_STATUS_PARSE = 4,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum G2Status G2Status;
#else
typedef int32_t G2Status;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Opaque handle over a one-dimensional potential model.
 */
typedef struct G2Model G2Model;

/**
 * Opaque handle over a rate function `s -> beta(s)`.
 */
typedef struct G2RateFn G2RateFn;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *g2_last_error_message(void);

/**
 * Parse a rate function from its JSON encoding (tagged by `family`).
 * On success `*out` owns the handle; release it with `g2_ratefn_free`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
G2Status g2_ratefn_parse(const char *json, G2RateFn **out);

/**
 * Serialize the rate function back to JSON. The returned string is owned
 * by the caller; release it with `g2_string_free`.
 *
 * # Safety
 * `handle` must come from `g2_ratefn_parse` and `out` must be valid.
 */
G2Status g2_ratefn_to_json(const G2RateFn *handle, char **out);

/**
 * Evaluate `beta(s)`. Non-positive `s` and diverging families yield
 * `INFINITY` with an `Ok` status.
 *
 * # Safety
 * `handle` must come from `g2_ratefn_parse` and `out` must be valid.
 */
G2Status g2_ratefn_eval(const G2RateFn *handle, double s, double *out);

/**
 * Generalized inverse `inf { s : beta(s) <= t }`; `INFINITY` when the
 * level is never reached.
 *
 * # Safety
 * `handle` must come from `g2_ratefn_parse` and `out` must be valid.
 */
G2Status g2_ratefn_generalized_inverse(const G2RateFn *handle, double t, double *out);

/**
 * Decay-rate transform: treats the handle as a weak-inequality rate and
 * returns the variance-decay envelope at time `t`.
 *
 * # Safety
 * `handle` must come from `g2_ratefn_parse` and `out` must be valid.
 */
G2Status g2_ratefn_decay_envelope(const G2RateFn *handle, double t, double *out);

/**
 * Level-set variant of the decay-rate transform.
 *
 * # Safety
 * `handle` must come from `g2_ratefn_parse` and `out` must be valid.
 */
G2Status g2_ratefn_decay_levelset(const G2RateFn *handle, double t, double *out);

/**
 * Converse transform: treats the handle as a decay envelope `xi` and
 * recovers a weak-inequality rate at slack `s`; `INFINITY` when the
 * envelope never certifies that slack.
 *
 * # Safety
 * `handle` must come from `g2_ratefn_parse` and `out` must be valid.
 */
G2Status g2_ratefn_rate_from_decay(const G2RateFn *handle, double s, double *out);

/**
 * Release a rate-function handle. Null is a no-op.
 *
 * # Safety
 * `handle` must come from `g2_ratefn_parse` and not be freed twice.
 */
void g2_ratefn_free(G2RateFn *handle);

/**
 * Release a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `s` must come from `g2_ratefn_to_json` and not be freed twice.
 */
void g2_string_free(char *s);

/**
 * Parse a one-dimensional potential model from JSON (tagged by `type`:
 * gaussian, subbotin, uniform, double_well, custom_1d). On success `*out`
 * owns the handle; release it with `g2_model_free`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
G2Status g2_model_parse(const char *json, G2Model **out);

/**
 * Release a model handle. Null is a no-op.
 *
 * # Safety
 * `handle` must come from `g2_model_parse` and not be freed twice.
 */
void g2_model_free(G2Model *handle);

/**
 * Exact spectral Poincaré constant of the model at the given grid
 * resolution.
 *
 * # Safety
 * `handle` must come from `g2_model_parse` and `out` must be valid.
 */
G2Status g2_model_poincare_constant(const G2Model *handle, uint32_t resolution, double *out);

/**
 * Integrated-curvature constant of the model; agrees with the Poincaré
 * constant on these generators.
 *
 * # Safety
 * `handle` must come from `g2_model_parse` and `out` must be valid.
 */
G2Status g2_model_integrated_gamma2(const G2Model *handle, uint32_t resolution, double *out);

/**
 * Curvature-tail Poincaré upper bound for the model; `INFINITY` when the
 * clipped inverse-rate mass diverges (the bound is then vacuous, not an
 * error).
 *
 * # Safety
 * `handle` must come from `g2_model_parse` and `out` must be valid.
 */
G2Status g2_model_curvature_tail_bound(const G2Model *handle, uint32_t resolution, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GAMMA2_H */
