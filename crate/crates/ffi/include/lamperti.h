#ifndef LAMPERTI_H
#define LAMPERTI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. `LAMPERTI_STATUS_OK` is zero.
 */
typedef enum LampertiStatus {
  LAMPERTI_STATUS_OK = 0,
  LAMPERTI_STATUS_NULL_POINTER = 1,
  LAMPERTI_STATUS_DOMAIN = 2,
  LAMPERTI_STATUS_CONFIG = 3,
  LAMPERTI_STATUS_INSUFFICIENT_DATA = 4,
  LAMPERTI_STATUS_FIT_DEGENERATE = 5,
  LAMPERTI_STATUS_UNSUPPORTED = 6,
  LAMPERTI_STATUS_RESOURCE_LIMIT = 7,
  LAMPERTI_STATUS_INTERRUPTED = 8,
  LAMPERTI_STATUS_PARSE = 9,
  LAMPERTI_STATUS_IO = 10,
  LAMPERTI_STATUS_INVALID_UTF8 = 11,
  LAMPERTI_STATUS_OUT_OF_RANGE = 12,
  LAMPERTI_STATUS_PANIC = 13,
} LampertiStatus;

/**
 * A validated run configuration.
 */
typedef struct LampertiConfig LampertiConfig;

/**
 * Simulated trajectories of one ensemble run.
 */
typedef struct LampertiEnsemble LampertiEnsemble;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *lamperti_version(void);

/**
 * Message for the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *lamperti_last_error(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void lamperti_string_free(char *s);

/**
 * `(a (1 + beta))^(1 / (1 + beta))`.
 *
 * # Safety
 * `out` must be valid for one `double` write.
 */
enum LampertiStatus lamperti_lambda_const(double a, double beta, double *out);

/**
 * # Safety
 * `out` must be valid for one `double` write.
 */
enum LampertiStatus lamperti_clt_std(double sigma, double beta, double *out);

/**
 * # Safety
 * `out` must be valid for one `double` write.
 */
enum LampertiStatus lamperti_bd_clt_std(double b, double beta, double *out);

/**
 * Up, hold and down probabilities of the birth-death chain at `x`, written
 * to `out[0..3]`.
 *
 * # Safety
 * `out` must be valid for three `double` writes.
 */
enum LampertiStatus lamperti_bd_probs(double beta, double rho, double b, uint64_t x, double *out);

/**
 * Parses and validates a JSON run configuration.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be valid for one
 * pointer write.
 */
enum LampertiStatus lamperti_config_from_json(const char *json, struct LampertiConfig **out);

/**
 * # Safety
 * `cfg` must be NULL or a handle from [`lamperti_config_from_json`].
 */
void lamperti_config_free(struct LampertiConfig *cfg);

/**
 * Hex SHA-256 of the experiment definition. Free with
 * [`lamperti_string_free`].
 *
 * # Safety
 * `cfg` must be a live config handle; `out` valid for one pointer write.
 */
enum LampertiStatus lamperti_config_hash(const struct LampertiConfig *cfg, char **out);

/**
 * Simulates the ensemble of `cfg`. Worker threads follow
 * `LAMPERTI_THREADS`.
 *
 * # Safety
 * `cfg` must be a live config handle; `out` valid for one pointer write.
 */
enum LampertiStatus lamperti_ensemble_run(const struct LampertiConfig *cfg,
                                          struct LampertiEnsemble **out);

/**
 * # Safety
 * `ens` must be NULL or a handle from [`lamperti_ensemble_run`].
 */
void lamperti_ensemble_free(struct LampertiEnsemble *ens);

/**
 * Number of trajectories and of grid samples per trajectory.
 *
 * # Safety
 * `ens` must be a live ensemble handle; the out-pointers must be valid.
 */
enum LampertiStatus lamperti_ensemble_shape(const struct LampertiEnsemble *ens,
                                            size_t *n_traj,
                                            size_t *n_samples);

/**
 * Copies the grid samples of trajectory `traj` into `t`, `x` and
 * `running_max`, each holding at least `cap` elements. Any of the three may
 * be NULL to skip it.
 *
 * # Safety
 * `ens` must be a live ensemble handle; each non-NULL buffer must be valid
 * for `cap` writes.
 */
enum LampertiStatus lamperti_ensemble_samples(const struct LampertiEnsemble *ens,
                                              size_t traj,
                                              uint64_t *t,
                                              double *x,
                                              double *running_max,
                                              size_t cap);

/**
 * Runs the checks of `cfg` against an existing ensemble and returns the
 * report as JSON. Free with [`lamperti_string_free`].
 *
 * # Safety
 * `cfg` and `ens` must be live handles; `out` valid for one pointer write.
 */
enum LampertiStatus lamperti_ensemble_verify(const struct LampertiConfig *cfg,
                                             const struct LampertiEnsemble *ens,
                                             char **out);

/**
 * Simulates and verifies in one call; the report is returned as JSON.
 *
 * # Safety
 * `cfg` must be a live config handle; `out` valid for one pointer write.
 */
enum LampertiStatus lamperti_verify(const struct LampertiConfig *cfg, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LAMPERTI_H */
