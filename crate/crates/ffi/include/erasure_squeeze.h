#ifndef ERASURE_SQUEEZE_H
#define ERASURE_SQUEEZE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum EsqStatus {
  ESQ_STATUS_OK = 0,
  ESQ_STATUS_NULL_POINTER = 1,
  ESQ_STATUS_INVALID_PARAMETER = 2,
  ESQ_STATUS_MODEL_VIOLATION = 3,
  ESQ_STATUS_NOT_CONVERGED = 4,
  ESQ_STATUS_INTERNAL = 5,
} EsqStatus;

/**
 * Physical parameter set.
 */
typedef struct EsqParams EsqParams;

/**
 * Pass sequence with waveplate angles, Larmor rate and loss.
 */
typedef struct EsqScheme EsqScheme;

typedef struct EsqSqueezing {
  double xi2;
  double xi2_db;
  double theta_opt;
  double mean_jx_out;
} EsqSqueezing;

/**
 * Result of a triple-pass search over decay and controls.
 */
typedef struct EsqOptimized {
  double eta_tilde;
  double kappa2;
  double alpha;
  double beta;
  double omega;
  struct EsqSqueezing squeezing;
} EsqOptimized;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create a parameter set. `out` receives a handle owned by the caller.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum EsqStatus esq_params_new(double n_atoms,
                              double optical_depth,
                              double eta_tilde,
                              double wall_reflectivity,
                              double beam_angle,
                              double pulse_duration,
                              struct EsqParams **out);

/**
 * # Safety
 * `p` must be null or a handle from [`esq_params_new`] not yet freed.
 */
void esq_params_free(struct EsqParams *p);

/**
 * Forward, backward, forward passes with waveplate angles `alpha` and
 * `beta`, Larmor rate `omega` per pulse, beam angle `phi` and loss `zeta`
 * per re-entry.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum EsqStatus esq_scheme_triple_pass(double alpha,
                                      double beta,
                                      double omega,
                                      double phi,
                                      double zeta,
                                      struct EsqScheme **out);

/**
 * # Safety
 * `out` must be null or valid for writes.
 */
enum EsqStatus esq_scheme_double_pass(double zeta, struct EsqScheme **out);

/**
 * # Safety
 * `out` must be null or valid for writes.
 */
enum EsqStatus esq_scheme_ring(uint32_t n_passes,
                               double zeta,
                               double omega,
                               struct EsqScheme **out);

/**
 * # Safety
 * `s` must be null or a scheme handle not yet freed.
 */
void esq_scheme_free(struct EsqScheme *s);

/**
 * Number of passes of a scheme, 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live scheme handle.
 */
uint32_t esq_scheme_passes(const struct EsqScheme *s);

/**
 * Slice simulation with `segments` slices per pulse.
 *
 * # Safety
 * Handles must be live; `out` must be valid for writes.
 */
enum EsqStatus esq_simulate(const struct EsqParams *params,
                            const struct EsqScheme *scheme,
                            uint32_t segments,
                            struct EsqSqueezing *out);

/**
 * Continuum-limit propagation of the same scheme.
 *
 * # Safety
 * Handles must be live; `out` must be valid for writes.
 */
enum EsqStatus esq_continuous(const struct EsqParams *params,
                              const struct EsqScheme *scheme,
                              struct EsqSqueezing *out);

/**
 * Best triple-pass squeezing at optical depth `alpha0`, searching decay and
 * controls with the default settings.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum EsqStatus esq_optimize_tat(double alpha0, double zeta, double phi, struct EsqOptimized *out);

double esq_dp_reference(double kappa);

double esq_ideal_tat_reference(double kappa, uint32_t n_passes);

double esq_lambda_coefficient(uint32_t n_passes);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library on the same thread.
 */
const char *esq_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ERASURE_SQUEEZE_H */
