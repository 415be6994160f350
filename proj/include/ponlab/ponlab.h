/* C interface to the ponlab PON link simulator and equalizer bench. */
#ifndef PONLAB_PONLAB_H
#define PONLAB_PONLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(PONLAB_BUILDING_LIBRARY)
#define PONLAB_API __declspec(dllexport)
#else
#define PONLAB_API __declspec(dllimport)
#endif
#else
#define PONLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns one of these. On failure the message is
 * available from ponlab_last_error() on the calling thread. */
typedef enum ponlab_status {
  PONLAB_OK = 0,
  PONLAB_ERR_INVALID_ARGUMENT = 1,
  PONLAB_ERR_SHAPE_MISMATCH = 2,
  PONLAB_ERR_NUMERICAL = 3,
  PONLAB_ERR_IO = 4,
  PONLAB_ERR_DIVERGED = 5,
  PONLAB_ERR_AMBIGUOUS = 6,
  PONLAB_ERR_INFEASIBLE = 7,
  PONLAB_ERR_INTERNAL = 8
} ponlab_status;

typedef struct ponlab_config ponlab_config;
typedef struct ponlab_frame ponlab_frame;
typedef struct ponlab_results ponlab_results;

typedef struct ponlab_ber {
  uint64_t bit_errors;
  uint64_t bits_counted;
  uint64_t symbol_errors;
  uint64_t symbols_counted;
  uint64_t errors_by_level[4];
  double ber;
  double ser;
} ponlab_ber;

/* One sweep point or hypermap cell. Strings are owned by the results handle. */
typedef struct ponlab_point {
  double distance_km;
  const char* scenario;
  const char* equalizer;
  uint32_t window; /* 0 outside hypermaps */
  int32_t levels;
  uint64_t seed;
  const char* status; /* "ok", "infeasible" or "failed:<code>" */
  ponlab_ber ber;
} ponlab_point;

PONLAB_API const char* ponlab_version(void);
/* Thread-local; empty string when the last call on this thread succeeded. */
PONLAB_API const char* ponlab_last_error(void);
PONLAB_API const char* ponlab_status_name(int status);
/* 0 quiet, 1 warnings, 2 progress. */
PONLAB_API void ponlab_set_log_level(int level);
PONLAB_API void ponlab_string_free(char* s);

/* Configuration. Every physical constant has a key; missing keys take defaults. */
PONLAB_API int ponlab_config_create(ponlab_config** out);
PONLAB_API int ponlab_config_load(const char* path, ponlab_config** out);
PONLAB_API int ponlab_config_parse(const char* json, ponlab_config** out);
PONLAB_API void ponlab_config_destroy(ponlab_config* cfg);
PONLAB_API int ponlab_config_to_json(const ponlab_config* cfg, char** out);
/* Writes 16 hex digits and a terminating NUL. */
PONLAB_API int ponlab_config_hash(const ponlab_config* cfg, char out[17]);
PONLAB_API int ponlab_config_set_seed(ponlab_config* cfg, uint64_t seed);
PONLAB_API int ponlab_config_set_scenario(ponlab_config* cfg, const char* scenario);
PONLAB_API int ponlab_config_set_distances(ponlab_config* cfg, const double* km, size_t n);
PONLAB_API int ponlab_config_set_output_dir(ponlab_config* cfg, const char* dir);
PONLAB_API int ponlab_config_get_output_dir(const ponlab_config* cfg, char** out);

/* One synchronized 1-SpS capture. */
PONLAB_API int ponlab_simulate(const ponlab_config* cfg, double distance_km, uint32_t capture, ponlab_frame** out);
PONLAB_API void ponlab_frame_destroy(ponlab_frame* frame);
PONLAB_API size_t ponlab_frame_length(const ponlab_frame* frame);
/* Copy min(n, length) values. */
PONLAB_API int ponlab_frame_soft(const ponlab_frame* frame, double* out, size_t n);
PONLAB_API int ponlab_frame_symbols(const ponlab_frame* frame, uint8_t* out, size_t n);
PONLAB_API int ponlab_frame_alignment(const ponlab_frame* frame, int64_t* lag_samples, int32_t* phase_offset);
PONLAB_API int ponlab_frame_write(const ponlab_frame* frame, const char* path);
/* Optical field at the photodetector input (float32 I/Q plus a JSON sidecar). */
PONLAB_API int ponlab_write_waveform(const ponlab_config* cfg, double distance_km, uint32_t capture,
                                     const char* path);

/* Trains "dnn" or "fc-scinet" on the captures of one distance and saves a
 * checkpoint. log_path and best_val_mse may be NULL. */
PONLAB_API int ponlab_train(const ponlab_config* cfg, double distance_km, const char* equalizer,
                            const char* checkpoint_path, const char* log_path, double* best_val_mse);
/* Test-split BER. checkpoint_path is required for trained models and ignored
 * for "none", "ffe9" and "ffe21". */
PONLAB_API int ponlab_evaluate(const ponlab_config* cfg, double distance_km, const char* equalizer,
                               const char* checkpoint_path, ponlab_ber* out);

PONLAB_API int ponlab_run_sweep(const ponlab_config* cfg, ponlab_results** out);
PONLAB_API int ponlab_run_hypermap(const ponlab_config* cfg, ponlab_results** out);
PONLAB_API void ponlab_results_destroy(ponlab_results* results);
PONLAB_API size_t ponlab_results_count(const ponlab_results* results);
PONLAB_API int ponlab_results_get(const ponlab_results* results, size_t index, ponlab_point* out);
/* which: "csv", "plot" or "details"; NULL for anything else. */
PONLAB_API const char* ponlab_results_path(const ponlab_results* results, const char* which);
/* Index of the lowest-BER hypermap cell, -1 when there is none. */
PONLAB_API int64_t ponlab_results_argmin(const ponlab_results* results);

/* JSON report and text table; either output pointer may be NULL. */
PONLAB_API int ponlab_complexity_report(const ponlab_config* cfg, const char* const* sweep_csv_paths, size_t n,
                                        char** json_out, char** table_out);

#ifdef __cplusplus
}
#endif

#endif /* PONLAB_PONLAB_H */
