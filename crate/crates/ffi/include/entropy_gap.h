#ifndef ENTROPY_GAP_H
#define ENTROPY_GAP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum EgStatus {
  EgOk = 0,
  EgNullPointer = 1,
  EgInvalidArgument = 2,
  EgNotHermitian = 3,
  EgNotPsd = 4,
  EgConvergenceFailure = 5,
  EgDimensionMismatch = 6,
  EgSupportDeficient = 7,
  EgInvalidState = 8,
  EgIoError = 9,
  EgParseError = 10,
  EgInternalPanic = 11,
} EgStatus;

/**
 * Random ensembles accessible through the ABI.
 */
typedef enum EgEnsemble {
  EgEnsembleHs = 0,
  EgEnsemblePure = 1,
  EgEnsembleMarkovClassicalC = 2,
} EgEnsemble;

/**
 * Opaque handle to a multipartite quantum state.
 */
typedef struct EgState EgState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer is
 * valid until the next failing call on the same thread; do not free it.
 */
const char *eg_last_error_message(void);

/**
 * Library version as a static string; do not free.
 */
const char *eg_version(void);

/**
 * Release a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must have been returned by a `char**` out-parameter of this library
 * and not freed before.
 */
void eg_string_free(char *s);

/**
 * Release a state handle. NULL is ignored.
 *
 * # Safety
 * `state` must have been created by an `eg_state_*` constructor and not
 * freed before.
 */
void eg_state_free(struct EgState *state);

/**
 * Parse a state from the JSON state-file schema
 * `{"dims": [...], "labels": [...], "kind": "state"|"substate",
 *   "matrix": [[re, im], ...]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated UTF-8 string and `out` a valid pointer.
 */
enum EgStatus eg_state_from_json(const char *json, struct EgState **out);

/**
 * Draw a state from a seeded ensemble over the given subsystem dimensions.
 *
 * # Safety
 * `dims` must point to `n_dims` readable entries; `out` must be valid.
 */
enum EgStatus eg_state_random(enum EgEnsemble kind,
                              const uintptr_t *dims,
                              uintptr_t n_dims,
                              uint64_t seed,
                              struct EgState **out);

/**
 * Serialize a state back to the JSON state-file schema.
 *
 * # Safety
 * `state` must be a live handle; `out` must be valid.
 */
enum EgStatus eg_state_to_json(const struct EgState *state, char **out);

/**
 * Total Hilbert-space dimension of the state; 0 for a NULL handle.
 *
 * # Safety
 * `state` must be a live handle or NULL.
 */
uintptr_t eg_state_dim(const struct EgState *state);

/**
 * von Neumann entropy in nats.
 *
 * # Safety
 * `state` must be a live handle; `out` must be valid.
 */
enum EgStatus eg_von_neumann_entropy(const struct EgState *state, double *out);

/**
 * Umegaki relative entropy `S(rho||sigma)` in nats; positive infinity when
 * the support condition fails.
 *
 * # Safety
 * Both handles must be live; `out` must be valid.
 */
enum EgStatus eg_relative_entropy(const struct EgState *rho,
                                  const struct EgState *sigma,
                                  double *out);

/**
 * Conditional mutual information `I(A:B|C)` of a tripartite state, in nats.
 *
 * # Safety
 * `state` must be a live handle; `out` must be valid.
 */
enum EgStatus eg_cmi(const struct EgState *state, double *out);

/**
 * Trace of the Markov operator `exp(log rho_AC + log rho_BC - log rho_C)`.
 *
 * # Safety
 * `state` must be a live handle; `out` must be valid.
 */
enum EgStatus eg_markov_operator_trace(const struct EgState *state, double *out);

/**
 * Full Markov trace-criterion diagnostics as a JSON document.
 *
 * # Safety
 * `state` must be a live handle; `out` must be valid.
 */
enum EgStatus eg_markov_report_json(const struct EgState *state, double tol, char **out);

/**
 * Run a verifier suite from a JSON `RunConfig`
 * (`{"suite": "super-ssa", "dims": [2,2,2], "n_samples": 100, ...}`) and
 * return the full report as JSON. `all_pass`, when non-NULL, receives
 * whether every sample passed.
 *
 * # Safety
 * `config_json` must be a NUL-terminated UTF-8 string; `out` must be valid;
 * `all_pass` may be NULL.
 */
enum EgStatus eg_run_suite_json(const char *config_json, char **out, bool *all_pass);

/**
 * Scan the Markov-operator trace statistic over a seeded ensemble and
 * return the summary as JSON.
 *
 * # Safety
 * `dims` must point to `n_dims` readable entries; `out` must be valid.
 */
enum EgStatus eg_scan_json(enum EgEnsemble kind,
                           const uintptr_t *dims,
                           uintptr_t n_dims,
                           uintptr_t n_samples,
                           uint64_t seed,
                           char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ENTROPY_GAP_H */
