/* C interface to the Lambda-GEM simulator.
 *
 * Handles are opaque. Every call returns an lgem_status; on failure the
 * message is available from lgem_last_error() on the same thread. Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with lgem_string_free.
 */

#ifndef LGEM_LGEM_H
#define LGEM_LGEM_H

#include <stddef.h>

#if defined(LGEM_BUILDING_LIBRARY)
#define LGEM_API __attribute__((visibility("default")))
#else
#define LGEM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lgem_status {
  LGEM_OK = 0,
  LGEM_ERR_INVALID_ARGUMENT = 1,
  LGEM_ERR_VALIDATION = 2,
  LGEM_ERR_NON_FINITE = 3,
  LGEM_ERR_STABILITY_BOUND = 4,
  LGEM_ERR_ZERO_GRADIENT = 5,
  LGEM_ERR_NO_ROOT = 6,
  LGEM_ERR_EMPTY_SPECTRUM = 7,
  LGEM_ERR_NO_CROSSING = 8,
  LGEM_ERR_EMPTY_WINDOW = 9,
  LGEM_ERR_DEGENERATE_FIT = 10,
  LGEM_ERR_SEPARATION_TOO_SMALL = 11,
  LGEM_ERR_IO = 12,
  LGEM_ERR_PARSE = 13,
  LGEM_ERR_INTERNAL = 99
} lgem_status;

typedef struct lgem_config lgem_config;
typedef struct lgem_record lgem_record;

typedef struct lgem_run_options {
  int snapshot_stride;  /* keep every n-th time step as a snapshot */
  int kspectrum_stride; /* k-spectrum every n-th step */
  int keep_snapshots;   /* 0 or 1 */
} lgem_run_options;

LGEM_API const char* lgem_version(void);
LGEM_API const char* lgem_status_name(lgem_status s);
LGEM_API const char* lgem_last_error(void);
LGEM_API void lgem_string_free(char* s);

/* JSON array of preset names. */
LGEM_API lgem_status lgem_preset_names(char** json_out);

LGEM_API lgem_status lgem_config_from_preset(const char* name, lgem_config** out);
/* base may be NULL; otherwise the document is merged over it. */
LGEM_API lgem_status lgem_config_from_json(const char* json, const lgem_config* base,
                                           lgem_config** out);
LGEM_API lgem_status lgem_config_load(const char* path, const lgem_config* base,
                                      lgem_config** out);
LGEM_API lgem_status lgem_config_to_json(const lgem_config* cfg, char** json_out);
LGEM_API lgem_status lgem_config_hash(const lgem_config* cfg, char** hex_out);
/* LGEM_OK if valid, LGEM_ERR_VALIDATION otherwise; the report (one failure
 * per line, empty when valid) is returned either way when report_out is set. */
LGEM_API lgem_status lgem_config_validate(const lgem_config* cfg, char** report_out);
LGEM_API void lgem_config_free(lgem_config* cfg);

LGEM_API void lgem_run_options_default(lgem_run_options* opts);
/* opts may be NULL for defaults. */
LGEM_API lgem_status lgem_run(const lgem_config* cfg, const lgem_run_options* opts,
                              lgem_record** out);
LGEM_API lgem_status lgem_record_window_energy(const lgem_record* rec, const char* window,
                                               double* energy_out);
LGEM_API lgem_status lgem_record_sample_count(const lgem_record* rec, size_t* count_out);
/* Output-face field of one channel at sample index i. */
LGEM_API lgem_status lgem_record_output_sample(const lgem_record* rec, int channel, size_t i,
                                               double* t, double* re, double* im);
LGEM_API lgem_status lgem_record_energies_json(const lgem_record* rec, char** json_out);
/* boundary.csv, snapshots.csv, kspectra.csv, energies.json, config.json */
LGEM_API lgem_status lgem_record_export(const lgem_record* rec, const char* dir);
LGEM_API lgem_status lgem_record_save(const lgem_record* rec, const char* path);
LGEM_API lgem_status lgem_record_load(const char* path, lgem_record** out);
LGEM_API void lgem_record_free(lgem_record* rec);

/* kind: "phase", "coupling" or "mismatch". Values are count points from start
 * to stop inclusive (phases in rad, relative coupling power, or mu). Writes
 * sweep.csv and summary.json into out_dir when it is not NULL; the summary
 * JSON is also returned through summary_out when set. workers <= 0 means one
 * per processor. */
LGEM_API lgem_status lgem_sweep(const lgem_config* cfg, const char* kind, double start,
                                double stop, int count, int workers, const char* out_dir,
                                char** summary_out);

/* Evaluates a JSON event list with the beamsplitter cascade model and
 * returns predicted energies (and balance solutions) as JSON. */
LGEM_API lgem_status lgem_oracle(const char* events_json, char** result_out);

#ifdef __cplusplus
}
#endif

#endif /* LGEM_LGEM_H */
