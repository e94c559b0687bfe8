#ifndef SPINSME_H
#define SPINSME_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result of every fallible call.
 */
typedef enum SpinsmeStatus {
  SPINSME_STATUS_OK = 0,
  SPINSME_STATUS_NULL_POINTER = 1,
  SPINSME_STATUS_INVALID_UTF8 = 2,
  /**
   * Config could not be parsed or is inconsistent.
   */
  SPINSME_STATUS_CONFIG = 3,
  /**
   * Physics validation failed or an input was out of range.
   */
  SPINSME_STATUS_INVALID = 4,
  /**
   * The computation aborted for numerical reasons.
   */
  SPINSME_STATUS_NUMERICAL = 5,
  SPINSME_STATUS_IO = 6,
  SPINSME_STATUS_BUFFER_TOO_SMALL = 7,
  SPINSME_STATUS_PANIC = 8,
} SpinsmeStatus;

/**
 * Subcommands of the runner.
 */
typedef enum SpinsmeCommand {
  SPINSME_COMMAND_SPECTRUM = 0,
  SPINSME_COMMAND_TRAJECTORY = 1,
  SPINSME_COMMAND_ENSEMBLE = 2,
  SPINSME_COMMAND_SWEEP = 3,
  SPINSME_COMMAND_CORRELATED = 4,
  SPINSME_COMMAND_VALIDATE = 5,
} SpinsmeCommand;

/**
 * A parsed experiment config.
 */
typedef struct SpinsmeExperiment SpinsmeExperiment;

/**
 * A computed spectrum.
 */
typedef struct SpinsmeSpectrum SpinsmeSpectrum;

/**
 * Peak of a spectrum; `fwhm` is NaN when the half-height level is not crossed.
 */
typedef struct SpinsmePeak {
  double omega_star;
  double height;
  double fwhm;
  bool multi_peak;
} SpinsmePeak;

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next spinsme call on the same thread.
 */
const char *spinsme_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *spinsme_version(void);

/**
 * Parse a TOML config. On success `*out` owns a new handle.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a writable pointer.
 */
enum SpinsmeStatus spinsme_experiment_from_toml(const char *toml, struct SpinsmeExperiment **out);

/**
 * # Safety
 * `exp` must come from `spinsme_experiment_from_toml` and not be used afterwards. Null is ignored.
 */
void spinsme_experiment_free(struct SpinsmeExperiment *exp);

/**
 * # Safety
 * `exp` must be a live handle.
 */
enum SpinsmeStatus spinsme_experiment_set_seed(struct SpinsmeExperiment *exp, uint64_t seed);

/**
 * Skip the validity check before runs.
 *
 * # Safety
 * `exp` must be a live handle.
 */
enum SpinsmeStatus spinsme_experiment_set_force(struct SpinsmeExperiment *exp, bool force);

/**
 * Run a subcommand, writing its files into `out_dir` (null means the config's directory).
 *
 * # Safety
 * `exp` must be a live handle; `out_dir` null or NUL-terminated.
 */
enum SpinsmeStatus spinsme_run(const struct SpinsmeExperiment *exp,
                               enum SpinsmeCommand command,
                               const char *out_dir);

/**
 * Regression spectrum of the experiment. On success `*out` owns a new handle.
 *
 * # Safety
 * `exp` must be a live handle and `out` writable.
 */
enum SpinsmeStatus spinsme_spectrum_compute(const struct SpinsmeExperiment *exp,
                                            struct SpinsmeSpectrum **out);

/**
 * Number of ω points; 0 for a null handle.
 *
 * # Safety
 * `spec` must be null or a live handle.
 */
size_t spinsme_spectrum_len(const struct SpinsmeSpectrum *spec);

/**
 * Copy ω, S_raw and S_display into caller buffers of `len` doubles each.
 * Any of the three may be null to skip it.
 *
 * # Safety
 * Non-null buffers must hold `len` doubles.
 */
enum SpinsmeStatus spinsme_spectrum_copy(const struct SpinsmeSpectrum *spec,
                                         double *omega,
                                         double *s_raw,
                                         double *s_display,
                                         size_t len);

/**
 * Peak metrics; fails with `Numerical` when the window held no interior peak.
 *
 * # Safety
 * `spec` must be a live handle and `out` writable.
 */
enum SpinsmeStatus spinsme_spectrum_peak(const struct SpinsmeSpectrum *spec,
                                         struct SpinsmePeak *out);

/**
 * Shot-noise floor 2ηκ and zero-frequency line weight.
 *
 * # Safety
 * `spec` must be a live handle; outputs may be null.
 */
enum SpinsmeStatus spinsme_spectrum_weights(const struct SpinsmeSpectrum *spec,
                                            double *delta_weight,
                                            double *dc_weight);

/**
 * # Safety
 * `spec` must come from `spinsme_spectrum_compute` and not be used afterwards. Null is ignored.
 */
void spinsme_spectrum_free(struct SpinsmeSpectrum *spec);

#endif  /* SPINSME_H */
