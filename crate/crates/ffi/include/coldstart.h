#ifndef COLDSTART_H
#define COLDSTART_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum CsStatus {
  CS_STATUS_OK = 0,
  CS_STATUS_NULL_POINTER = 1,
  CS_STATUS_INVALID_ARGUMENT = 2,
  CS_STATUS_IO = 3,
  CS_STATUS_PARSE = 4,
  CS_STATUS_DATA = 5,
  CS_STATUS_NOT_FOUND = 6,
  CS_STATUS_INTERNAL = 7,
} CsStatus;

/**
 * A loaded corpus.
 */
typedef struct CsCorpus CsCorpus;

/**
 * A fitted embedding backend together with its text preparation.
 */
typedef struct CsEmbedder CsEmbedder;

typedef struct CsPairingTable CsPairingTable;

/**
 * Ratings plus the item neighborhoods built from them.
 */
typedef struct CsRatings CsRatings;

/**
 * An augmented recommendation list.
 */
typedef struct CsRecommendation CsRecommendation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into this library from the same thread.
 */
const char *cs_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cs_version(void);

/**
 * Loads a JSON-lines corpus.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum CsStatus cs_corpus_load(const char *path, struct CsCorpus **out);

/**
 * Number of documents, 0 for NULL.
 *
 * # Safety
 * `corpus` must be NULL or a live handle.
 */
size_t cs_corpus_len(const struct CsCorpus *corpus);

/**
 * Number of documents flagged warm, 0 for NULL.
 *
 * # Safety
 * `corpus` must be NULL or a live handle.
 */
size_t cs_corpus_warm_count(const struct CsCorpus *corpus);

/**
 * # Safety
 * `corpus` must be NULL or a handle not yet freed.
 */
void cs_corpus_free(struct CsCorpus *corpus);

/**
 * Fits `backend` ("tfidf", "lda" or "doc2vec") on every document, after
 * appending the contextual fields `enrich_n` times.
 *
 * # Safety
 * `corpus` must be a live handle, `backend` a NUL-terminated string and
 * `out` writable.
 */
enum CsStatus cs_embedder_fit(const struct CsCorpus *corpus,
                              const char *backend,
                              size_t enrich_n,
                              uint64_t seed,
                              struct CsEmbedder **out);

/**
 * Writes the model files into directory `dir`.
 *
 * # Safety
 * `embedder` must be a live handle and `dir` a NUL-terminated string.
 */
enum CsStatus cs_embedder_save(const struct CsEmbedder *embedder, const char *dir);

/**
 * Loads model files written by `cs_embedder_save` or `coldstart train`.
 *
 * # Safety
 * `backend` and `dir` must be NUL-terminated strings; `out` writable.
 */
enum CsStatus cs_embedder_load(const char *backend,
                               const char *dir,
                               size_t enrich_n,
                               uint64_t seed,
                               struct CsEmbedder **out);

/**
 * # Safety
 * `embedder` must be NULL or a handle not yet freed.
 */
void cs_embedder_free(struct CsEmbedder *embedder);

/**
 * Pairs the corpus's cold documents with its warm documents.
 *
 * # Safety
 * `corpus` and `embedder` must be live handles; `out` writable.
 */
enum CsStatus cs_pair(const struct CsCorpus *corpus,
                      const struct CsEmbedder *embedder,
                      size_t top_m,
                      double threshold,
                      struct CsPairingTable **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` writable.
 */
enum CsStatus cs_pairing_load(const char *path, struct CsPairingTable **out);

/**
 * # Safety
 * `table` must be a live handle and `path` a NUL-terminated string.
 */
enum CsStatus cs_pairing_save(const struct CsPairingTable *table, const char *path);

/**
 * Cold items with at least one partner, 0 for NULL.
 *
 * # Safety
 * `table` must be NULL or a live handle.
 */
size_t cs_pairing_paired_count(const struct CsPairingTable *table);

/**
 * Cold items without a partner, 0 for NULL.
 *
 * # Safety
 * `table` must be NULL or a live handle.
 */
size_t cs_pairing_unpaired_count(const struct CsPairingTable *table);

/**
 * # Safety
 * `table` must be NULL or a handle not yet freed.
 */
void cs_pairing_free(struct CsPairingTable *table);

/**
 * Loads a ratings TSV and builds item neighborhoods of size `k` using
 * `metric` ("pearson" or "cosine").
 *
 * # Safety
 * `path` and `metric` must be NUL-terminated strings; `out` writable.
 */
enum CsStatus cs_ratings_load(const char *path,
                              const char *metric,
                              size_t k,
                              struct CsRatings **out);

/**
 * # Safety
 * `ratings` must be NULL or a handle not yet freed.
 */
void cs_ratings_free(struct CsRatings *ratings);

/**
 * Top-`n` CF recommendations for `user`, with paired cold items inserted
 * when `pairs` is not NULL. The output is capped at `max_len` items.
 *
 * # Safety
 * `ratings` must be a live handle, `pairs` NULL or a live handle, `user` a
 * NUL-terminated string and `out` writable.
 */
enum CsStatus cs_recommend(const struct CsRatings *ratings,
                           const struct CsPairingTable *pairs,
                           const char *user,
                           size_t n,
                           size_t max_len,
                           struct CsRecommendation **out);

/**
 * Number of items, 0 for NULL.
 *
 * # Safety
 * `rec` must be NULL or a live handle.
 */
size_t cs_recommendation_len(const struct CsRecommendation *rec);

/**
 * Item id at `index` (valid while `rec` lives) and whether it was inserted
 * by the pairing layer.
 *
 * # Safety
 * `rec` must be a live handle; `item` and `paired` writable.
 */
enum CsStatus cs_recommendation_get(const struct CsRecommendation *rec,
                                    size_t index,
                                    const char **item,
                                    bool *paired);

/**
 * # Safety
 * `rec` must be NULL or a handle not yet freed.
 */
void cs_recommendation_free(struct CsRecommendation *rec);

/**
 * Cosine similarity of two dense vectors of length `len`.
 *
 * # Safety
 * `a` and `b` must point to `len` readable doubles; `out` writable.
 */
enum CsStatus cs_cosine(const double *a, const double *b, size_t len, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COLDSTART_H */
