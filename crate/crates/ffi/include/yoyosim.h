/* C interface to the yoyosim autoscaling simulator.
 *
 * Every function returns a YsStatus; out-parameters are written only on
 * YS_STATUS_OK. Handles (YsScenario, YsSimResult, YsModel) are opaque and
 * must be released with their paired *_free function. Strings returned
 * through out-parameters are NUL-terminated UTF-8 owned by the caller and
 * must be released with ys_string_free. ys_last_error_message describes
 * the most recent failure on the calling thread.
 */

#ifndef YOYOSIM_H
#define YOYOSIM_H

/* Generated with cbindgen:0.27.0 */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every C-ABI call.
typedef enum YsStatus {
  // Success; out-parameters are valid.
  YS_STATUS_OK = 0,
  // A required pointer argument was null.
  YS_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  YS_STATUS_INVALID_UTF8 = 2,
  // An argument or configuration value violates a documented constraint.
  YS_STATUS_INVALID_INPUT = 3,
  // A requested ratio or statistic is mathematically undefined.
  YS_STATUS_UNDEFINED = 4,
  // Malformed scenario, dataset, or model text.
  YS_STATUS_PARSE_ERROR = 5,
  // A filesystem operation failed.
  YS_STATUS_IO_ERROR = 6,
  // The implementation panicked; state may be inconsistent.
  YS_STATUS_PANIC = 7,
} YsStatus;

// A trained boosted-tree classifier (opaque).
typedef struct YsModel YsModel;

// A parsed, validated scenario (opaque).
typedef struct YsScenario YsScenario;

// A completed simulation with its trace and event log (opaque).
typedef struct YsSimResult YsSimResult;

// One telemetry row, mirrored as plain C data.
typedef struct YsTraceRow {
  // Simulated second.
  uint64_t t;
  // Offered request rate, requests/s.
  double offered_rate;
  // Pods serving traffic this tick.
  uint32_t ready_pods;
  // Live pods (pending + warming + ready).
  uint32_t total_pods;
  // Nodes in the ready phase.
  uint32_t ready_nodes;
  // All nodes, the billable count.
  uint32_t total_nodes;
  // Average relative CPU across live pods, percent.
  double avg_relative_cpu;
  // Service response time, milliseconds.
  double response_time;
  // Requests failed this tick.
  uint64_t errors;
} YsTraceRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string; never freed.
const char *ys_version(void);

// Description of the most recent failure on this thread, or null if the
// last call succeeded. Valid until the next call on the same thread.
const char *ys_last_error_message(void);

// Frees a string returned by this library. Null is a no-op.
//
// # Safety
// `text` must be a pointer previously returned by this library through a
// string out-parameter, or null.
void ys_string_free(char *text);

// Parses and validates a TOML scenario.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be a valid pointer.
enum YsStatus ys_scenario_from_toml(const char *text, struct YsScenario **out);

// Loads one of the built-in scenarios by name.
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be a valid pointer.
enum YsStatus ys_scenario_builtin(const char *name, struct YsScenario **out);

// Serializes a scenario back to TOML.
//
// # Safety
// `scenario` must be a live handle; `out` must be a valid pointer.
enum YsStatus ys_scenario_to_toml(const struct YsScenario *scenario, char **out);

// Releases a scenario handle. Null is a no-op.
//
// # Safety
// `scenario` must be a handle from this library that has not been freed,
// or null.
void ys_scenario_free(struct YsScenario *scenario);

// Runs a scenario to completion at one-second ticks.
//
// # Safety
// `scenario` must be a live handle; `out` must be a valid pointer.
enum YsStatus ys_simulate(const struct YsScenario *scenario, struct YsSimResult **out);

// Releases a simulation result. Null is a no-op.
//
// # Safety
// `result` must be a handle from this library that has not been freed,
// or null.
void ys_sim_result_free(struct YsSimResult *result);

// Number of telemetry rows in the result's trace.
//
// # Safety
// `result` must be a live handle; `out` must be a valid pointer.
enum YsStatus ys_trace_len(const struct YsSimResult *result, uintptr_t *out);

// Copies telemetry row `index` into `out`.
//
// # Safety
// `result` must be a live handle; `out` must be a valid pointer.
enum YsStatus ys_trace_row(const struct YsSimResult *result,
                           uintptr_t index,
                           struct YsTraceRow *out);

// Renders the full trace as CSV.
//
// # Safety
// `result` must be a live handle; `out` must be a valid pointer.
enum YsStatus ys_trace_csv(const struct YsSimResult *result, char **out);

// Renders the lifecycle event log as JSON Lines.
//
// # Safety
// `result` must be a live handle; `out` must be a valid pointer.
enum YsStatus ys_events_jsonl(const struct YsSimResult *result, char **out);

// Runs the scenario together with its steady baseline and unit-power
// variant, and returns the damage report as a JSON object.
//
// # Safety
// `scenario` must be a live handle; `out` must be a valid pointer.
enum YsStatus ys_assess_damage(const struct YsScenario *scenario, char **out);

// Trains a boosted-tree classifier on a labeled feature CSV (the format
// written by the dataset generator: feature columns then a trailing 0/1
// `label` column). Uses the default hyperparameters; on the canonical
// telemetry features, exact split-gain ties prefer the scaling series.
//
// # Safety
// `csv` must be a NUL-terminated string; `out` must be a valid pointer.
enum YsStatus ys_model_train_from_csv(const char *csv, struct YsModel **out);

// Restores a model from its JSON dump.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be a valid pointer.
enum YsStatus ys_model_from_json(const char *json, struct YsModel **out);

// Serializes a model to JSON; the dump restores an identical model.
//
// # Safety
// `model` must be a live handle; `out` must be a valid pointer.
enum YsStatus ys_model_to_json(const struct YsModel *model, char **out);

// Classifies one feature vector: attack probability and hard label at the
// 0.5 threshold.
//
// # Safety
// `model` must be a live handle; `features` must point to `len` doubles;
// `out_probability` and `out_is_attack` must be valid pointers.
enum YsStatus ys_model_predict(const struct YsModel *model,
                               const double *features,
                               uintptr_t len,
                               double *out_probability,
                               bool *out_is_attack);

// Releases a model handle. Null is a no-op.
//
// # Safety
// `model` must be a handle from this library that has not been freed,
// or null.
void ys_model_free(struct YsModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* YOYOSIM_H */
