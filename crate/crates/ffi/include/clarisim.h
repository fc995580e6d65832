#ifndef CLARISIM_H
#define CLARISIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ClarisimStatus {
  CLARISIM_STATUS_OK = 0,
  CLARISIM_STATUS_NULL_POINTER = 1,
  CLARISIM_STATUS_INVALID_UTF8 = 2,
  /**
   * Bad argument or configuration value.
   */
  CLARISIM_STATUS_INVALID_ARGUMENT = 3,
  /**
   * Malformed JSON or schema violation.
   */
  CLARISIM_STATUS_PARSE = 4,
  /**
   * Any other library error.
   */
  CLARISIM_STATUS_FAILED = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  CLARISIM_STATUS_PANIC = 6,
} ClarisimStatus;

typedef enum ClarisimUnderspec {
  CLARISIM_UNDERSPEC_CRITICAL_UNDER = 0,
  CLARISIM_UNDERSPEC_MINOR_UNDER = 1,
  CLARISIM_UNDERSPEC_SUFFICIENT = 2,
} ClarisimUnderspec;

typedef enum ClarisimStrategy {
  CLARISIM_STRATEGY_REFUSE = 0,
  CLARISIM_STRATEGY_DIRECT_RESPONSE = 1,
  CLARISIM_STRATEGY_HEDGE = 2,
  CLARISIM_STRATEGY_CLARIFY = 3,
  CLARISIM_STRATEGY_INTERROGATE = 4,
  CLARISIM_STRATEGY_MISSING_RESPONSE = 5,
  CLARISIM_STRATEGY_MISC = 6,
} ClarisimStrategy;

/**
 * Opaque catalog handle.
 */
typedef struct ClarisimCatalog ClarisimCatalog;

/**
 * Opaque corpus handle.
 */
typedef struct ClarisimCorpus ClarisimCorpus;

/**
 * Opaque meta-policy handle.
 */
typedef struct ClarisimMetaPolicy ClarisimMetaPolicy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *clarisim_version(void);

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next call into the library from this thread.
 */
const char *clarisim_last_error_message(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void clarisim_string_free(char *s);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum ClarisimStatus clarisim_label_underspec(size_t revealed_count,
                                             size_t total_count,
                                             enum ClarisimUnderspec *out_label);

/**
 * # Safety
 * `response` must be a NUL-terminated string and `out_strategy` valid for writes.
 */
enum ClarisimStatus clarisim_classify_tau(const char *response,
                                          enum ClarisimStrategy *out_strategy);

/**
 * Cognitive cost of a response: its whitespace-separated token count.
 *
 * # Safety
 * `response` must be a NUL-terminated string and `out_cost` valid for writes.
 */
enum ClarisimStatus clarisim_cost(const char *response, size_t *out_cost);

/**
 * Generates `n` goal records for a built-in intent.
 *
 * # Safety
 * `intent` must be a NUL-terminated string and `out_corpus` valid for writes.
 */
enum ClarisimStatus clarisim_corpus_generate(const char *intent,
                                             size_t n,
                                             uint64_t seed,
                                             struct ClarisimCorpus **out_corpus);

/**
 * # Safety
 * `corpus` must be a live handle.
 */
enum ClarisimStatus clarisim_corpus_len(const struct ClarisimCorpus *corpus, size_t *out_len);

/**
 * Label of the masked query of record `index`.
 *
 * # Safety
 * `corpus` must be a live handle and `out_label` valid for writes.
 */
enum ClarisimStatus clarisim_corpus_label(const struct ClarisimCorpus *corpus,
                                          size_t index,
                                          enum ClarisimUnderspec *out_label);

/**
 * # Safety
 * `corpus` must be a live handle and `out_json` valid for writes.
 */
enum ClarisimStatus clarisim_corpus_to_json(const struct ClarisimCorpus *corpus, char **out_json);

/**
 * # Safety
 * `corpus` must be NULL or a handle from this library, not yet freed.
 */
void clarisim_corpus_free(struct ClarisimCorpus *corpus);

/**
 * Generates a catalog for the corpus's domain, with an exact match injected
 * for every corpus goal.
 *
 * # Safety
 * `corpus` must be a live handle and `out_catalog` valid for writes.
 */
enum ClarisimStatus clarisim_catalog_generate(const struct ClarisimCorpus *corpus,
                                              size_t size,
                                              uint64_t seed,
                                              struct ClarisimCatalog **out_catalog);

/**
 * # Safety
 * `catalog` must be NULL or a handle from this library, not yet freed.
 */
void clarisim_catalog_free(struct ClarisimCatalog *catalog);

/**
 * Computes Q\* records for every query in the corpus and returns them as a
 * JSON array.
 *
 * # Safety
 * Handles must be live and `out_json` valid for writes.
 */
enum ClarisimStatus clarisim_qstar_json(const struct ClarisimCorpus *corpus,
                                        const struct ClarisimCatalog *catalog,
                                        size_t n_mc,
                                        uint64_t seed,
                                        char **out_json);

/**
 * Fits a k-NN meta-policy from a JSON array of Q\* records.
 *
 * # Safety
 * `qstar_json` must be a NUL-terminated string and `out_meta` valid for writes.
 */
enum ClarisimStatus clarisim_metapolicy_from_qstar_json(const char *qstar_json,
                                                        size_t k,
                                                        double lambda,
                                                        struct ClarisimMetaPolicy **out_meta);

/**
 * Strategy β selects at turn 0 for the masked query of record `index`.
 *
 * # Safety
 * Handles must be live and `out_strategy` valid for writes.
 */
enum ClarisimStatus clarisim_metapolicy_select(const struct ClarisimMetaPolicy *meta,
                                               const struct ClarisimCorpus *corpus,
                                               size_t index,
                                               enum ClarisimStrategy *out_strategy);

/**
 * # Safety
 * `meta` must be NULL or a handle from this library, not yet freed.
 */
void clarisim_metapolicy_free(struct ClarisimMetaPolicy *meta);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CLARISIM_H */
