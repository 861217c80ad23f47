#ifndef CITEREC_H
#define CITEREC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes for every fallible entry point.
 */
typedef enum {
  CITEREC_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  CITEREC_STATUS_NULL_ARGUMENT = 1,
  /**
   * An input string was not valid UTF-8.
   */
  CITEREC_STATUS_INVALID_UTF8 = 2,
  /**
   * A file could not be read.
   */
  CITEREC_STATUS_IO_ERROR = 3,
  /**
   * A file or input string could not be parsed.
   */
  CITEREC_STATUS_PARSE_ERROR = 4,
  /**
   * A referenced artifact is missing; build it with the CLI first.
   */
  CITEREC_STATUS_MISSING_ARTIFACT = 5,
  /**
   * Internal invariant failure.
   */
  CITEREC_STATUS_INTERNAL_ERROR = 6,
} CiterecStatus;

typedef struct CiterecCfRecommender CiterecCfRecommender;

typedef struct CiterecContextRecommender CiterecContextRecommender;

typedef struct CiterecParser CiterecParser;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a parser. `authorities_csv_path` may be NULL, in which case case
 * citations cannot be resolved and normalize to the unknown sentinel.
 *
 * # Safety
 * `authorities_csv_path` must be NULL or a valid NUL-terminated path; `out`
 * must be a valid pointer.
 */
CiterecStatus citerec_parser_new(const char *authorities_csv_path, CiterecParser **out);

/**
 * # Safety
 * `parser` must be NULL or a pointer from [`citerec_parser_new`], not yet
 * freed.
 */
void citerec_parser_free(CiterecParser *parser);

/**
 * Extracts raw citation spans from text as a JSON array of
 * `{"text","start","end","kind"}` objects (byte offsets).
 *
 * # Safety
 * All pointers must be valid; `text` NUL-terminated.
 */
CiterecStatus citerec_parser_extract_json(const CiterecParser *parser,
                                          const char *text,
                                          char **out_json);

/**
 * Extracts and normalizes citations as a JSON array of
 * `{"start","end","class","key"}` objects, one per normalized citation
 * (multi-section citations contribute several entries sharing a span).
 *
 * # Safety
 * All pointers must be valid; `text` NUL-terminated.
 */
CiterecStatus citerec_parser_normalize_json(const CiterecParser *parser,
                                            const char *text,
                                            char **out_json);

/**
 * Opens a collaborative-filtering recommender from a trained model artifact
 * and its citation vocabulary.
 *
 * # Safety
 * Paths must be NUL-terminated; `out` must be valid.
 */
CiterecStatus citerec_cf_open(const char *model_path,
                              const char *vocab_path,
                              CiterecCfRecommender **out);

/**
 * # Safety
 * `handle` must be NULL or a pointer from [`citerec_cf_open`], not yet freed.
 */
void citerec_cf_free(CiterecCfRecommender *handle);

/**
 * Recommends citations for a partial citation list given as a JSON array of
 * vocabulary keys, e.g. `["CLA#6456776","38 U.S.C. § 5108"]`. Unknown keys
 * map to the UNK sentinel. The result is
 * `{"items":[{"index","key","class","score"}]}` ranked best-first.
 *
 * # Safety
 * All pointers must be valid; strings NUL-terminated.
 */
CiterecStatus citerec_cf_recommend_json(const CiterecCfRecommender *handle,
                                        const char *keys_json,
                                        size_t top_n,
                                        char **out_json);

/**
 * Opens a context recommender from trained artifacts. The authority list is
 * optional (NULL) and only affects how case citations inside query text are
 * resolved back into vocabulary tokens.
 *
 * # Safety
 * Paths must be NUL-terminated; `out` must be valid.
 */
CiterecStatus citerec_context_open(const char *bank_path,
                                   const char *text_vocab_path,
                                   const char *vocab_path,
                                   const char *authorities_csv_path,
                                   CiterecContextRecommender **out);

/**
 * # Safety
 * `handle` must be NULL or a pointer from [`citerec_context_open`], not yet
 * freed.
 */
void citerec_context_free(CiterecContextRecommender *handle);

/**
 * Recommends citations for a draft text snippet: the text is tokenized, the
 * trailing context window becomes the query, and banked citations are ranked
 * by mean squared context similarity. Result shape matches
 * [`citerec_cf_recommend_json`].
 *
 * # Safety
 * All pointers must be valid; `text` NUL-terminated.
 */
CiterecStatus citerec_context_recommend_json(const CiterecContextRecommender *handle,
                                             const char *text,
                                             size_t top_n,
                                             char **out_json);

/**
 * Frees a string returned by this library. NULL is a no-op.
 *
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void citerec_string_free(char *s);

/**
 * Message for the current thread's most recent failure, or NULL. The pointer
 * stays valid until the next citerec call on this thread.
 */
const char *citerec_last_error(void);

/**
 * Library version as a static string.
 */
const char *citerec_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CITEREC_H */
