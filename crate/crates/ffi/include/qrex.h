#ifndef QREX_H
#define QREX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum QrexStatus {
  QREX_STATUS_OK = 0,
  QREX_STATUS_NULL_POINTER = 1,
  QREX_STATUS_INVALID_ARGUMENT = 2,
  QREX_STATUS_CONFIG = 3,
  QREX_STATUS_RESOURCE_GUARD = 4,
  QREX_STATUS_NUMERICAL = 5,
  QREX_STATUS_INVARIANT_FAILURE = 6,
  QREX_STATUS_PANIC = 7,
} QrexStatus;

typedef enum QrexWeight {
  QREX_WEIGHT_GAUSSIAN = 0,
  QREX_WEIGHT_METROPOLIS = 1,
} QrexWeight;

typedef enum QrexSwapMode {
  /**
   * System generator only.
   */
  QREX_SWAP_MODE_NONE = 0,
  /**
   * Auxiliary copy of the A register with a local swap.
   */
  QREX_SWAP_MODE_LOCAL_A = 1,
  /**
   * Second full replica at `beta2` with a global swap.
   */
  QREX_SWAP_MODE_GLOBAL = 2,
} QrexSwapMode;

/**
 * Which generator of a handle a query refers to.
 */
typedef enum QrexTarget {
  QREX_TARGET_SYSTEM = 0,
  QREX_TARGET_JOINT = 1,
} QrexTarget;

typedef enum QrexFormat {
  QREX_FORMAT_CSV = 0,
  QREX_FORMAT_JSON = 1,
} QrexFormat;

/**
 * Opaque handle to a single or replica-exchange generator with its Gibbs state.
 */
typedef struct QrexGenerator QrexGenerator;

/**
 * Opaque Hamiltonian handle.
 */
typedef struct QrexHamiltonian QrexHamiltonian;

/**
 * Opaque scenario report handle.
 */
typedef struct QrexReport QrexReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *qrex_version(void);

/**
 * Message of the most recent failure on this thread, or NULL.
 *
 * The pointer stays valid until the next qrex call on the same thread.
 */
const char *qrex_last_error(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must be NULL or a pointer obtained from a qrex out-parameter that has not been freed.
 */
void qrex_string_free(char *s);

/**
 * `θ(x) = ½[erfc((1+2x)/(2√2)) + e^{−x} erfc((1−2x)/(2√2))]`.
 */
double qrex_theta(double x);

/**
 * Parse a Hamiltonian from its JSON description.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum QrexStatus qrex_hamiltonian_from_json(const char *json, struct QrexHamiltonian **out);

/**
 * Defected Ising ring on `n ≥ 3` qubits with defect strength `j` on bond (0, 1) and A = {0, 1}.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum QrexStatus qrex_hamiltonian_defected_ising_1d(size_t n,
                                                   double j,
                                                   struct QrexHamiltonian **out);

/**
 * Copy of `h` with the defect bond set to strength `j`.
 *
 * # Safety
 * `h` must be a live handle and `out` a valid pointer.
 */
enum QrexStatus qrex_hamiltonian_with_defect(const struct QrexHamiltonian *h,
                                             double j,
                                             struct QrexHamiltonian **out);

/**
 * Number of qubits of `h`.
 *
 * # Safety
 * `h` must be a live handle and `out` a valid pointer.
 */
enum QrexStatus qrex_hamiltonian_num_qubits(const struct QrexHamiltonian *h, size_t *out);

/**
 * JSON description of `h`; release with `qrex_string_free`.
 *
 * # Safety
 * `h` must be a live handle and `out` a valid pointer.
 */
enum QrexStatus qrex_hamiltonian_to_json(const struct QrexHamiltonian *h, char **out);

/**
 * # Safety
 * `h` must be NULL or a handle that has not been freed.
 */
void qrex_hamiltonian_free(struct QrexHamiltonian *h);

/**
 * Build the generator of `h` at inverse temperature `beta` with single-site Pauli couplings.
 *
 * `beta2` is only read in global mode. Superoperators larger than
 * 4096 × 4096 are refused with `ResourceGuard`.
 *
 * # Safety
 * `h` must be a live handle and `out` a valid pointer.
 */
enum QrexStatus qrex_generator_build(const struct QrexHamiltonian *h,
                                     double beta,
                                     enum QrexWeight weight,
                                     enum QrexSwapMode mode,
                                     double beta2,
                                     struct QrexGenerator **out);

/**
 * Hilbert-space dimension of the chosen generator.
 *
 * # Safety
 * `g` must be a live handle and `out` a valid pointer.
 */
enum QrexStatus qrex_generator_dim(const struct QrexGenerator *g,
                                   enum QrexTarget target,
                                   size_t *out);

/**
 * KMS spectral gap of the chosen generator.
 *
 * # Safety
 * `g` must be a live handle and `out` a valid pointer.
 */
enum QrexStatus qrex_generator_gap(const struct QrexGenerator *g,
                                   enum QrexTarget target,
                                   double *out);

/**
 * Detailed-balance residual of the chosen generator with respect to its Gibbs state.
 *
 * # Safety
 * `g` must be a live handle and `out` a valid pointer.
 */
enum QrexStatus qrex_generator_detailed_balance(const struct QrexGenerator *g,
                                                enum QrexTarget target,
                                                double *out);

/**
 * # Safety
 * `g` must be NULL or a handle that has not been freed.
 */
void qrex_generator_free(struct QrexGenerator *g);

/**
 * Run an experiment configuration given as JSON text.
 *
 * `parallel` is the worker count, or 0 for the default pool. When a
 * `verify` check fails the report is still written to `out` and the call
 * returns `InvariantFailure`.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum QrexStatus qrex_run_config(const char *config_json, size_t parallel, struct QrexReport **out);

/**
 * Whether every check of the report passed.
 *
 * # Safety
 * `r` must be a live handle and `out` a valid pointer.
 */
enum QrexStatus qrex_report_passed(const struct QrexReport *r, bool *out);

/**
 * Number of records in the report.
 *
 * # Safety
 * `r` must be a live handle and `out` a valid pointer.
 */
enum QrexStatus qrex_report_len(const struct QrexReport *r, size_t *out);

/**
 * Serialize the report; release the string with `qrex_string_free`.
 *
 * # Safety
 * `r` must be a live handle and `out` a valid pointer.
 */
enum QrexStatus qrex_report_encode(const struct QrexReport *r, enum QrexFormat format, char **out);

/**
 * # Safety
 * `r` must be NULL or a handle that has not been freed.
 */
void qrex_report_free(struct QrexReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QREX_H */
