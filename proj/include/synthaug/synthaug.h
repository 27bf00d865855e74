/* C interface to the synthaug library. Handles are opaque; every call that
 * can fail returns an sa_status and leaves a message for sa_last_error().
 * Strings returned through char** are owned by the caller and released with
 * sa_string_free(). Structured inputs and outputs are JSON documents. */
#ifndef SYNTHAUG_H
#define SYNTHAUG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SA_API __declspec(dllexport)
#else
#define SA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sa_status {
  SA_OK = 0,
  SA_INVALID_ARGUMENT = 1,
  SA_DIMENSION_MISMATCH = 2,
  SA_NON_FINITE = 3,
  SA_PARSE_ERROR = 4,
  SA_IO_ERROR = 5,
  SA_INSUFFICIENT_DATA = 6,
  SA_POOL_SHORTFALL = 7,
  SA_EMPTY_RESULT = 8,
  SA_TRAINING_FAILURE = 9,
  SA_INTERNAL_ERROR = 100
} sa_status;

typedef struct sa_dataset sa_dataset;
typedef struct sa_model sa_model;

SA_API const char* sa_version(void);
/* Message of the last failure on the calling thread; "" after success. */
SA_API const char* sa_last_error(void);
SA_API const char* sa_status_name(sa_status status);
SA_API void sa_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

SA_API sa_status sa_dataset_load(const char* path, sa_dataset** out);
SA_API sa_status sa_dataset_save(const sa_dataset* ds, const char* path);
/* features: rows x n_features row-major {0,1}; labels: rows entries in {0,1}. */
SA_API sa_status sa_dataset_create(size_t rows, size_t n_features, const uint8_t* features,
                                   const uint8_t* labels, sa_dataset** out);
SA_API void sa_dataset_free(sa_dataset* ds);
SA_API size_t sa_dataset_rows(const sa_dataset* ds);
SA_API size_t sa_dataset_features(const sa_dataset* ds);
/* Either output may be NULL. */
SA_API sa_status sa_dataset_copy(const sa_dataset* ds, uint8_t* features, uint8_t* labels);

/* options: {"label_column", "threshold" (0.5), "missing_marker" ("")}.
 * report (nullable) receives the pre-processing summary. */
SA_API sa_status sa_preprocess(const char* csv_path, const char* options_json, sa_dataset** out,
                               char** report_json);
/* options: {"n", "d", "class_ratio", "minority_coupling", "seed"}. */
SA_API sa_status sa_benchmark_generate(const char* options_json, sa_dataset** out);

/* ---- generators -------------------------------------------------------- */

/* grid: {"generator": {"family", "config"}, "axes": {key: [values]}, "ho_fraction",
 * "prdc_k", "seed", "threads"}. */
SA_API sa_status sa_tune(const sa_dataset* ds, const char* grid_json, char** result_json);
/* generator: {"family": "vae"|"dpgan"|"dpgan001"|"dpgan050"|"ctgan", "config": {...}}.
 * trace_json may be NULL. */
SA_API sa_status sa_train(const sa_dataset* ds, const char* generator_json, sa_model** out,
                          char** trace_json);
SA_API sa_status sa_model_save(const sa_model* model, const char* path);
SA_API sa_status sa_model_load(const char* path, sa_model** out);
SA_API void sa_model_free(sa_model* model);
SA_API sa_status sa_model_info(const sa_model* model, char** info_json);
SA_API sa_status sa_generate(const sa_model* model, size_t n, uint64_t seed, sa_dataset** out);

/* ---- evaluation -------------------------------------------------------- */

SA_API sa_status sa_audit(const sa_dataset* train, const sa_dataset* generated, char** report_json);
SA_API sa_status sa_filter_unique_novel(const sa_dataset* train, const sa_dataset* generated,
                                        sa_dataset** out);
/* Features and label together form the point set. */
SA_API sa_status sa_prdc(const sa_dataset* real, const sa_dataset* synth, size_t k,
                         char** scores_json);
/* options: {"settings": ["A", "B", "original", "upsampled", "downsampled"], "folds",
 * "repetitions", "seed", "classifiers", "classifier_params", "threads"}.
 * pool may be NULL when no synthetic setting is requested. */
SA_API sa_status sa_utility(const sa_dataset* ds, const sa_dataset* pool, const char* options_json,
                            char** report_json);

/* ---- pipeline ---------------------------------------------------------- */

SA_API sa_status sa_run_experiment(const char* config_json, char** summary_json);
SA_API sa_status sa_export_figures(const char* run_dir, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif
