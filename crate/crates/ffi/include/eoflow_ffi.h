#ifndef EOFLOW_FFI_H
#define EOFLOW_FFI_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum EoStatus {
  EO_STATUS_OK = 0,
  EO_STATUS_NULL_ARGUMENT = 1,
  EO_STATUS_INVALID_UTF8 = 2,
  EO_STATUS_INVALID_JSON = 3,
  EO_STATUS_NOT_FOUND = 4,
  EO_STATUS_PARSE_ERROR = 5,
  EO_STATUS_VALIDATION_ERROR = 6,
  EO_STATUS_UNKNOWN_SLOT = 7,
  EO_STATUS_INVALID_VALUE = 8,
  EO_STATUS_IMMUTABLE_VIOLATION = 9,
  EO_STATUS_CONDITION_NOT_MET = 10,
  EO_STATUS_VALUE_CONDITION_VIOLATION = 11,
  EO_STATUS_CASCADE_BUDGET_EXCEEDED = 12,
  EO_STATUS_REPLAY_DIVERGED = 13,
  EO_STATUS_PANIC = 14,
} EoStatus;

/**
 * Opaque engine handle.
 */
typedef struct EoEngine EoEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates an engine with an empty graph. Free with `eo_engine_free`.
 */
struct EoEngine *eo_engine_new(void);

/**
 * # Safety
 * `engine` is null or a handle from `eo_engine_new` not yet freed.
 */
void eo_engine_free(struct EoEngine *engine);

/**
 * Parses, validates and loads a BSL block.
 *
 * # Safety
 * `engine` is a live handle; `source` and `actor` are NUL-terminated.
 */
enum EoStatus eo_engine_load(struct EoEngine *engine, const char *source, const char *actor);

/**
 * Loads a bundled corpus block by name (`delivery`, `recharging`, `docking`).
 *
 * # Safety
 * `engine` is a live handle; `name` and `actor` are NUL-terminated.
 */
enum EoStatus eo_engine_load_corpus(struct EoEngine *engine, const char *name, const char *actor);

/**
 * Writes a value and runs the cascade. `value_json` is a JSON scalar or a
 * tagged value such as `{"type":"ref","value":"Loc A"}`.
 *
 * # Safety
 * `engine` is a live handle; the strings are NUL-terminated.
 */
enum EoStatus eo_engine_inject(struct EoEngine *engine,
                               const char *actor,
                               const char *individual,
                               const char *property,
                               const char *value_json);

/**
 * Number of events in the log.
 *
 * # Safety
 * `engine` is null or a live handle. Null yields 0.
 */
uint64_t eo_engine_event_count(const struct EoEngine *engine);

/**
 * Exports the log as JSON Lines into `*out`.
 *
 * # Safety
 * `engine` is a live handle; `out` is valid for one pointer write.
 */
enum EoStatus eo_engine_export(struct EoEngine *engine, char **out);

/**
 * Projected properties of one individual as a JSON object into `*out`.
 *
 * # Safety
 * `engine` is a live handle; `individual` is NUL-terminated; `out` is
 * valid for one pointer write.
 */
enum EoStatus eo_engine_state(struct EoEngine *engine, const char *individual, char **out);

/**
 * Rebuilds a log from its external events and compares byte for byte.
 * Returns `ReplayDiverged` with the first differing seq in the error text.
 *
 * # Safety
 * `log` is NUL-terminated.
 */
enum EoStatus eo_replay_check(const char *log);

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread; do not free it.
 */
const char *eo_last_error(void);

/**
 * Releases a string returned through an `out` parameter.
 *
 * # Safety
 * `s` is null or a pointer from this library not yet freed.
 */
void eo_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EOFLOW_FFI_H */
