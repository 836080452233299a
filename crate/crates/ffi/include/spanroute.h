#ifndef SPANROUTE_H
#define SPANROUTE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SrStatus {
  SR_STATUS_OK = 0,
  SR_STATUS_NULL_ARGUMENT = 1,
  SR_STATUS_INVALID_UTF8 = 2,
  SR_STATUS_IO = 3,
  SR_STATUS_PARSE = 4,
  SR_STATUS_UNKNOWN_POLICY = 5,
  SR_STATUS_MISSING_FIELD = 6,
  SR_STATUS_INVALID_PARAM = 7,
  SR_STATUS_NETWORK = 8,
  SR_STATUS_SIMULATION = 9,
  SR_STATUS_OUT_OF_RANGE = 10,
  SR_STATUS_PANIC = 11,
} SrStatus;

// Results of simulating a scenario.
typedef struct SrResults SrResults;

// A parsed, validated scenario.
typedef struct SrScenario SrScenario;

// One checkpoint of a policy's aggregated regret curve.
typedef struct SrCheckpointRow {
  uint64_t t;
  double mean_cum_regret;
  double std_cum_regret;
  uint64_t replications;
} SrCheckpointRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the
// next call into this library from the same thread.
const char *sr_last_error_message(void);

// Library version as a static string.
const char *sr_version(void);

// Reads and validates a scenario file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum SrStatus sr_scenario_load(const char *path, struct SrScenario **out);

// Parses scenario text. `default_output` is the output prefix used when the
// text has no `output` field.
//
// # Safety
// `text` and `default_output` must be NUL-terminated strings and `out` a
// valid pointer.
enum SrStatus sr_scenario_parse(const char *text,
                                const char *default_output,
                                struct SrScenario **out);

// # Safety
// `scenario` must come from `sr_scenario_load` or `sr_scenario_parse` and
// not be freed twice. Null is ignored.
void sr_scenario_free(struct SrScenario *scenario);

// Resolved configuration text, as printed by `spanroute --validate-only`.
// Release the string with `sr_string_free`.
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
enum SrStatus sr_scenario_describe(const struct SrScenario *scenario, char **out);

// # Safety
// `s` must come from this library. Null is ignored.
void sr_string_free(char *s);

// Simulates the scenario in memory. `jobs` = 0 uses all cores.
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
enum SrStatus sr_simulate(const struct SrScenario *scenario, uint32_t jobs, struct SrResults **out);

// Simulates the scenario and writes the CSV files and summary to its output
// prefix, all or nothing. `jobs` = 0 uses all cores.
//
// # Safety
// `scenario` must be a live handle.
enum SrStatus sr_run(const struct SrScenario *scenario, uint32_t jobs);

// # Safety
// `results` must be a live handle or null.
uintptr_t sr_results_policy_count(const struct SrResults *results);

// Name of policy `index`, owned by the results handle.
//
// # Safety
// `results` must be a live handle or null.
const char *sr_results_policy_name(const struct SrResults *results, uintptr_t index);

// Number of checkpoint rows for policy `index` (0 if out of range).
//
// # Safety
// `results` must be a live handle or null.
uintptr_t sr_results_row_count(const struct SrResults *results, uintptr_t index);

// # Safety
// `results` must be a live handle and `out` a valid pointer.
enum SrStatus sr_results_row(const struct SrResults *results,
                             uintptr_t index,
                             uintptr_t row,
                             struct SrCheckpointRow *out);

// Id of the path with the smallest mean cost.
//
// # Safety
// `results` must be a live handle and `out` a valid pointer.
enum SrStatus sr_results_best_path(const struct SrResults *results, uintptr_t *out);

// # Safety
// `results` must come from `sr_simulate` and not be freed twice. Null is
// ignored.
void sr_results_free(struct SrResults *results);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPANROUTE_H */
