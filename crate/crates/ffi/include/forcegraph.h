#ifndef FORCEGRAPH_H
#define FORCEGRAPH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a call.
 */
typedef enum FgStatus {
  FG_STATUS_OK = 0,
  FG_STATUS_NULL_ARGUMENT = 1,
  FG_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed BRAT, CoNLL-U or model text.
   */
  FG_STATUS_PARSE = 3,
  FG_STATUS_IO = 4,
  /**
   * A model or parse the operation needs is missing.
   */
  FG_STATUS_PREREQUISITE = 5,
  FG_STATUS_INVALID_ARGUMENT = 6,
  FG_STATUS_INTERNAL = 7,
} FgStatus;

/**
 * A parsed document with its aligned dependency trees.
 */
typedef struct FgDocument FgDocument;

/**
 * A trained relation classifier.
 */
typedef struct FgRelNet FgRelNet;

/**
 * A trained sequence tagger.
 */
typedef struct FgTagger FgTagger;

/**
 * Precision, recall and F1 from raw counts.
 */
typedef struct FgPrf {
  double precision;
  double recall;
  double f1;
} FgPrf;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Owned by the
 * library; valid until the next failing call on the thread.
 */
const char *fg_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fg_version(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed. NULL is ignored.
 */
void fg_string_free(char *s);

/**
 * Parse a document from its text, BRAT annotations and optional CoNLL-U
 * parse (NULL for none).
 *
 * # Safety
 * String arguments must be NUL-terminated or NULL; `out` must be writable.
 */
enum FgStatus fg_document_parse(const char *text,
                                const char *ann,
                                const char *conllu,
                                struct FgDocument **out);

/**
 * # Safety
 * `doc` must come from [`fg_document_parse`] and not have been freed.
 */
void fg_document_free(struct FgDocument *doc);

/**
 * # Safety
 * `doc` must be a live handle or NULL (returns 0).
 */
size_t fg_document_entity_count(const struct FgDocument *doc);

/**
 * # Safety
 * `doc` must be a live handle or NULL (returns 0).
 */
size_t fg_document_relation_count(const struct FgDocument *doc);

/**
 * Canonical BRAT text of the document.
 *
 * # Safety
 * `doc` must be a live handle; `out` must be writable.
 */
enum FgStatus fg_document_serialize(const struct FgDocument *doc, char **out);

/**
 * Run `strategy` (e.g. "sdp-constrained") over the document's entities and
 * write the attachments as a JSON array. Classifier strategies need `model`;
 * others accept NULL. With `tagger`, entities come from the tagger instead
 * of the gold annotations.
 *
 * # Safety
 * Handles must be live or NULL where allowed; `strategy` must be a
 * NUL-terminated string; `out_json` must be writable.
 */
enum FgStatus fg_document_extract(const struct FgDocument *doc,
                                  const char *strategy,
                                  const struct FgRelNet *model,
                                  const struct FgTagger *tagger,
                                  char **out_json);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum FgStatus fg_relnet_load(const char *path, struct FgRelNet **out);

/**
 * # Safety
 * `model` must be a live handle or NULL (returns 0).
 */
size_t fg_relnet_parameter_count(const struct FgRelNet *model);

/**
 * # Safety
 * `model` must come from [`fg_relnet_load`] and not have been freed.
 */
void fg_relnet_free(struct FgRelNet *model);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum FgStatus fg_tagger_load(const char *path, struct FgTagger **out);

/**
 * Tag raw text; writes the predicted entities as a JSON array.
 *
 * # Safety
 * `tagger` must be live; `text` NUL-terminated; `out_json` writable.
 */
enum FgStatus fg_tagger_tag(const struct FgTagger *tagger, const char *text, char **out_json);

/**
 * # Safety
 * `tagger` must come from [`fg_tagger_load`] and not have been freed.
 */
void fg_tagger_free(struct FgTagger *tagger);

/**
 * Precision, recall and F1 for the given counts. Zero denominators give 0.
 *
 * # Safety
 * `out` must be writable.
 */
enum FgStatus fg_prf(size_t tp, size_t fp, size_t fn_, struct FgPrf *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FORCEGRAPH_H */
