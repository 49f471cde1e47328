#ifndef DOTMAT_H
#define DOTMAT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Trainer selector for [`dotmat_train`].
 */
typedef enum DotmatAlgorithm {
  DOTMAT_ALGORITHM_DOTMAT = 0,
  DOTMAT_ALGORITHM_DOTMAT_HYBRID = 1,
  DOTMAT_ALGORITHM_MF = 2,
} DotmatAlgorithm;

/**
 * Input format for [`dotmat_dataset_load`].
 */
typedef enum DotmatFormat {
  /**
   * `.json` cache, `.dat` MovieLens, `.csv` CSV.
   */
  DOTMAT_FORMAT_AUTO = 0,
  DOTMAT_FORMAT_MOVIELENS = 1,
  /**
   * Header row with `user_id,item_id,rating`.
   */
  DOTMAT_FORMAT_CSV = 2,
  DOTMAT_FORMAT_CACHE = 3,
} DotmatFormat;

/**
 * Result code of every fallible call.
 */
typedef enum DotmatStatus {
  DOTMAT_STATUS_OK = 0,
  DOTMAT_STATUS_NULL_POINTER = 1,
  DOTMAT_STATUS_INVALID_ARGUMENT = 2,
  DOTMAT_STATUS_PARSE = 3,
  DOTMAT_STATUS_IO = 4,
  DOTMAT_STATUS_LOOKUP = 5,
  DOTMAT_STATUS_CONFIG = 6,
  DOTMAT_STATUS_DIMENSION = 7,
  DOTMAT_STATUS_INTEGRITY = 8,
  DOTMAT_STATUS_DEGENERATE = 9,
  DOTMAT_STATUS_PANIC = 10,
} DotmatStatus;

/**
 * Opaque rating dataset.
 */
typedef struct DotmatDataset DotmatDataset;

/**
 * Opaque factor model.
 */
typedef struct DotmatModel DotmatModel;

typedef struct DotmatTrainConfig {
  double learning_rate;
  size_t epochs;
  size_t dim;
  double clamp_eps;
  uint64_t seed;
  size_t pairs_per_user;
} DotmatTrainConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *dotmat_last_error(void);

struct DotmatTrainConfig dotmat_train_config_default(void);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum DotmatStatus dotmat_dataset_load(const char *path,
                                      enum DotmatFormat format,
                                      struct DotmatDataset **out);

/**
 * Build a dataset from parallel arrays. `r_max <= 0` infers the ceiling.
 *
 * # Safety
 * Each array must hold `len` elements; `out` must be writable.
 */
enum DotmatStatus dotmat_dataset_from_triples(const uint64_t *users,
                                              const uint64_t *items,
                                              const double *ratings,
                                              size_t len,
                                              double r_max,
                                              struct DotmatDataset **out);

/**
 * # Safety
 * `dataset` must come from this library and not be freed twice.
 */
void dotmat_dataset_free(struct DotmatDataset *dataset);

/**
 * # Safety
 * Pointers must be valid or NULL.
 */
enum DotmatStatus dotmat_dataset_counts(const struct DotmatDataset *dataset,
                                        size_t *n_users,
                                        size_t *n_items,
                                        size_t *n_ratings,
                                        double *r_max);

/**
 * Train on every rating of `dataset` (DotMat reads only its id universes).
 *
 * # Safety
 * Pointers must be valid; `out` must be writable.
 */
enum DotmatStatus dotmat_train(const struct DotmatDataset *dataset,
                               enum DotmatAlgorithm algorithm,
                               const struct DotmatTrainConfig *config,
                               struct DotmatModel **out);

/**
 * Data-free DotMat over explicit id lists.
 *
 * # Safety
 * Arrays must hold the stated number of elements; `out` must be writable.
 */
enum DotmatStatus dotmat_train_datafree(const uint64_t *user_ids,
                                        size_t n_users,
                                        const uint64_t *item_ids,
                                        size_t n_items,
                                        const struct DotmatTrainConfig *config,
                                        struct DotmatModel **out);

/**
 * # Safety
 * `path` must be NUL-terminated; `out` must be writable.
 */
enum DotmatStatus dotmat_model_load(const char *path, struct DotmatModel **out);

/**
 * # Safety
 * `model` must be valid and `path` NUL-terminated.
 */
enum DotmatStatus dotmat_model_save(const struct DotmatModel *model, const char *path);

/**
 * # Safety
 * `model` must come from this library and not be freed twice.
 */
void dotmat_model_free(struct DotmatModel *model);

/**
 * Latent dimension, or 0 for NULL.
 *
 * # Safety
 * `model` must be valid or NULL.
 */
size_t dotmat_model_dim(const struct DotmatModel *model);

/**
 * `r_max` times the clamped user-item dot product.
 *
 * # Safety
 * `model` must be valid and `out` writable.
 */
enum DotmatStatus dotmat_model_predict(const struct DotmatModel *model,
                                       uint64_t user,
                                       uint64_t item,
                                       double r_max,
                                       double *out);

/**
 * Mean absolute error of `model` over every rating of `dataset`, using the
 * dataset's ceiling.
 *
 * # Safety
 * Pointers must be valid and `out` writable.
 */
enum DotmatStatus dotmat_model_mae(const struct DotmatModel *model,
                                   const struct DotmatDataset *dataset,
                                   double *out);

/**
 * # Safety
 * `u` and `v` must hold `k` elements; `out` must be writable.
 */
enum DotmatStatus dotmat_clamped_dot(const double *u,
                                     const double *v,
                                     size_t k,
                                     double eps,
                                     double *out);

/**
 * Mean absolute error of two parallel arrays.
 *
 * # Safety
 * Arrays must hold `len` elements; `out` must be writable.
 */
enum DotmatStatus dotmat_mae(const double *predicted,
                             const double *actual,
                             size_t len,
                             double *out);

/**
 * Popularity-concentration slope of per-item exposure counts.
 * `zero_excluded` may be NULL.
 *
 * # Safety
 * `counts` must hold `len` elements; `out` must be writable.
 */
enum DotmatStatus dotmat_matthew_degree(const double *counts,
                                        size_t len,
                                        double *out,
                                        size_t *zero_excluded);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DOTMAT_H */
