/* C interface to the fleetreg cluster-wise regression library. */

#ifndef FLEETREG_H
#define FLEETREG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call in this interface.
enum FleetregStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  // The call succeeded.
  FLEETREG_STATUS_OK = 0,
  // A runtime failure (I/O, numerical breakdown).
  FLEETREG_STATUS_RUNTIME_FAILURE = 1,
  // Rejected input: malformed JSON, invalid configuration, bad data.
  FLEETREG_STATUS_INVALID_INPUT = 2,
  // A required pointer argument was null.
  FLEETREG_STATUS_NULL_ARGUMENT = 3,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum FleetregStatus FleetregStatus;
#else
typedef int32_t FleetregStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

// Opaque handle to an in-memory dataset.
typedef struct FleetregDataset FleetregDataset;

// Opaque handle to a trained model (global or fleet).
typedef struct FleetregModel FleetregModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message from the most recent failure on the calling thread, or null if
// no call has failed yet.
//
// The pointer stays valid until the next failing call on the same thread;
// do not free it.
const char *fleetreg_last_error_message(void);

// Generate a synthetic clustered dataset from a generator config given as
// JSON (the same schema the `fleetreg generate` command reads).
//
// On `FLEETREG_STATUS_OK`, `*out` owns the dataset; release it with
// `fleetreg_dataset_free`.
//
// # Safety
// `config_json` must be null or point to a NUL-terminated string, and
// `out` must point to writable pointer storage.
FleetregStatus fleetreg_dataset_generate(const char *config_json, struct FleetregDataset **out);

// Load a dataset from a CSV file with named columns. `label_column` may be
// null when the data carries no sub-population labels.
//
// On `FLEETREG_STATUS_OK`, `*out` owns the dataset; release it with
// `fleetreg_dataset_free`.
//
// # Safety
// `path` and `target` must be null or NUL-terminated strings,
// `label_column` must be null or a NUL-terminated string, and `out` must
// point to writable pointer storage.
FleetregStatus fleetreg_dataset_load_csv(const char *path,
                                         const char *target,
                                         const char *label_column,
                                         struct FleetregDataset **out);

// Number of rows in the dataset; 0 when `dataset` is null.
//
// # Safety
// `dataset` must be null or a live handle from this library.
uintptr_t fleetreg_dataset_rows(const struct FleetregDataset *dataset);

// Number of feature columns in the dataset; 0 when `dataset` is null.
//
// # Safety
// `dataset` must be null or a live handle from this library.
uintptr_t fleetreg_dataset_features(const struct FleetregDataset *dataset);

// Release a dataset handle. Passing null is a no-op.
//
// # Safety
// `dataset` must be null or a handle from this library that has not been
// freed yet; it must not be used afterwards.
void fleetreg_dataset_free(struct FleetregDataset *dataset);

// Train one regressor on the whole dataset. The regressor is described by
// JSON such as `{"kind":"ridge","alpha":1.0}`; omitted fields take their
// defaults.
//
// On `FLEETREG_STATUS_OK`, `*out` owns the model; release it with
// `fleetreg_model_free`.
//
// # Safety
// `dataset` must be null or a live dataset handle, `spec_json` null or a
// NUL-terminated string, and `out` must point to writable pointer storage.
FleetregStatus fleetreg_train_global(const struct FleetregDataset *dataset,
                                     const char *spec_json,
                                     uint64_t seed,
                                     struct FleetregModel **out);

// Partition the dataset into `k` clusters by k-means and train one
// regressor per cluster. Predictions route each query to its nearest
// cluster's model.
//
// On `FLEETREG_STATUS_OK`, `*out` owns the model; release it with
// `fleetreg_model_free`.
//
// # Safety
// Same as `fleetreg_train_global`.
FleetregStatus fleetreg_train_fleet(const struct FleetregDataset *dataset,
                                    const char *spec_json,
                                    uintptr_t k,
                                    uint64_t seed,
                                    struct FleetregModel **out);

// Like `fleetreg_train_fleet`, but group rows by the label column the
// dataset was loaded with instead of discovering clusters. Fails with
// `FLEETREG_STATUS_INVALID_INPUT` when the dataset has no labels.
//
// # Safety
// Same as `fleetreg_train_global`.
FleetregStatus fleetreg_train_fleet_labeled(const struct FleetregDataset *dataset,
                                            const char *spec_json,
                                            uint64_t seed,
                                            struct FleetregModel **out);

// Predict the target for one feature row. For fleet models, `out_cluster`
// (when non-null) receives the id of the cluster that served the
// prediction; global models write -1.
//
// # Safety
// `model` must be null or a live model handle, `features` must point to
// `len` readable doubles, `out_prediction` must be writable, and
// `out_cluster` must be null or writable.
FleetregStatus fleetreg_model_predict(const struct FleetregModel *model,
                                      const double *features,
                                      uintptr_t len,
                                      double *out_prediction,
                                      int64_t *out_cluster);

// Serialize a model to JSON. On `FLEETREG_STATUS_OK`, `*out` owns a
// NUL-terminated string; release it with `fleetreg_string_free`.
//
// # Safety
// `model` must be null or a live model handle and `out` must point to
// writable pointer storage.
FleetregStatus fleetreg_model_to_json(const struct FleetregModel *model, char **out);

// Rebuild a model from JSON produced by `fleetreg_model_to_json`.
//
// On `FLEETREG_STATUS_OK`, `*out` owns the model; release it with
// `fleetreg_model_free`.
//
// # Safety
// `json` must be null or a NUL-terminated string and `out` must point to
// writable pointer storage.
FleetregStatus fleetreg_model_from_json(const char *json, struct FleetregModel **out);

// Release a string returned by this library. Passing null is a no-op.
//
// # Safety
// `s` must be null or a string returned by this library that has not been
// freed yet.
void fleetreg_string_free(char *s);

// Release a model handle. Passing null is a no-op.
//
// # Safety
// `model` must be null or a handle from this library that has not been
// freed yet; it must not be used afterwards.
void fleetreg_model_free(struct FleetregModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLEETREG_H */
