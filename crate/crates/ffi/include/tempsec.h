#ifndef TEMPSEC_H
#define TEMPSEC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Bit set in [`TsBound::flags`] when the bound is negative.
 */
#define TS_BOUND_VACUOUS 1

/**
 * Bit set when a lower-order term is omitted.
 */
#define TS_BOUND_ASYMPTOTIC 2

/**
 * Bit set when a hidden constant is taken as one.
 */
#define TS_BOUND_CONSTANT_FREE 4

/**
 * Result of every call.
 */
typedef enum TsStatus {
  TsStatus_Ok = 0,
  TsStatus_NullPointer = 1,
  TsStatus_InvalidArgument = 2,
  TsStatus_InvalidInstance = 3,
  TsStatus_Config = 4,
  TsStatus_Solver = 5,
  TsStatus_Io = 6,
  TsStatus_Panic = 7,
} TsStatus;

typedef enum TsVariant {
  TsVariant_Cardinality = 0,
  TsVariant_Packing = 1,
  TsVariant_Lengths = 2,
} TsVariant;

/**
 * Opaque instance handle.
 */
typedef struct TsInstance TsInstance;

/**
 * Aggregate of a Monte Carlo run.
 */
typedef struct TsSummary {
  double ratio;
  double ci_low;
  double ci_high;
  double mean_alg;
  double mean_opt;
  double bound;
  uint64_t trials;
  uint64_t invariant_failures;
} TsSummary;

typedef struct TsBound {
  double value;
  /**
   * NaN unless the guarantee has a separate leading term.
   */
  double leading;
  /**
   * NaN unless the guarantee has a separate error term.
   */
  double epsilon_term;
  uint32_t flags;
} TsBound;

typedef struct TsEpsilon {
  double value;
  double raw;
  bool clamped;
} TsEpsilon;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses an instance from JSON and stores a new handle in `*out`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TsStatus tempsec_instance_from_json(const char *json, struct TsInstance **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `instance` must come from [`tempsec_instance_from_json`] and not be used
 * afterwards.
 */
void tempsec_instance_free(struct TsInstance *instance);

/**
 * Number of items; 0 for null.
 *
 * # Safety
 * `instance` must be null or a live handle.
 */
uintptr_t tempsec_instance_len(const struct TsInstance *instance);

/**
 * Runs the experiment described by `config_json` (the configuration file
 * schema; its `instance` section is ignored) on `instance`.
 *
 * # Safety
 * Pointers must be valid; `config_json` NUL-terminated.
 */
enum TsStatus tempsec_run_trials(const struct TsInstance *instance,
                                 const char *config_json,
                                 uint32_t threads,
                                 struct TsSummary *out);

/**
 * Exact offline optimum for arrival times `times[0..n]` (indexed by item).
 *
 * # Safety
 * `times` must point to `n` readable doubles; `out` must be valid.
 */
enum TsStatus tempsec_opt_offline_exact(const struct TsInstance *instance,
                                        const double *times,
                                        uintptr_t n,
                                        double *out);

/**
 * Closed-form guarantee for a variant.
 *
 * # Safety
 * `out` must be valid.
 */
enum TsStatus tempsec_theoretical_bound(enum TsVariant variant,
                                        double gamma,
                                        double capacity,
                                        uintptr_t d,
                                        struct TsBound *out);

/**
 * Default packing shrink factor for sparsity `d` and capacity ratio `b`.
 *
 * # Safety
 * `out` must be valid.
 */
enum TsStatus tempsec_epsilon_default(uintptr_t d, double b, struct TsEpsilon *out);

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *tempsec_last_error(void);

/**
 * Library version, static.
 */
const char *tempsec_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TEMPSEC_H */
