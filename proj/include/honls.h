#ifndef HONLS_H
#define HONLS_H

/* C interface to the higher-order NLS ground-state library. A study is
 * described by an opaque configuration (defaults, a parsed config file, or
 * both plus targeted overrides) and executed with honls_study_run, which
 * writes its CSV/JSON/field outputs plus a manifest under a directory.
 *
 * All functions are thread-safe; the error message of the last failing call
 * is kept per thread and read with honls_last_error. */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum honls_status {
  HONLS_OK = 0,
  HONLS_ERROR_CONFIG = 1,   /* invalid configuration, key, or value */
  HONLS_ERROR_IO = 2,       /* file read or write failure */
  HONLS_ERROR_INTERNAL = 3, /* unexpected failure; see honls_last_error */
} honls_status;

/* Message from the last failing call on this thread; never NULL. */
const char* honls_last_error(void);

/* Library version string, e.g. "1.0.0". */
const char* honls_version(void);

typedef struct honls_config honls_config;

/* A configuration holding every default. Never fails. */
honls_config* honls_config_new(void);

/* Parse config text / a config file ("key = value" lines under [section]
 * headers). Returns NULL on error with the reason, including the line
 * number, in honls_last_error. */
honls_config* honls_config_parse(const char* text);
honls_config* honls_config_parse_file(const char* path);

void honls_config_free(honls_config* cfg);

/* One targeted override. The key is dotted config-file syntax ("problem.n",
 * "solver.seed", "output.out_dir", top-level "kind"); the value is written
 * exactly as it would appear after '=' in the file (quote strings that
 * contain spaces). */
honls_status honls_config_set(honls_config* cfg, const char* key,
                              const char* value);

/* Full resolved configuration as config-file text (the `defaults` dump).
 * Caller frees with honls_string_free. NULL on error. */
char* honls_config_dump(const honls_config* cfg);

/* Cross-field validation without running anything. */
honls_status honls_config_validate(const honls_config* cfg);

/* Run the configured study and write all outputs (manifest.json first)
 * under out_dir, or under the configured [output] out_dir when out_dir is
 * NULL. Returns HONLS_OK whenever outputs were produced and written, and
 * then sets *study_exit to the study's own result: 0 success, 1 solver
 * failure (per-point failures are recorded in the outputs). If message is
 * non-NULL it receives a one-line outcome (free with honls_string_free).
 * Error statuses mean nothing was written (bad config, unwritable
 * directory). */
honls_status honls_study_run(const honls_config* cfg, const char* out_dir,
                             int* study_exit, char** message);

void honls_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* HONLS_H */
