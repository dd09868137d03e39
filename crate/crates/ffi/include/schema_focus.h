#ifndef SCHEMA_FOCUS_H
#define SCHEMA_FOCUS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes. The non-zero values 1-4 match the CLI exit codes.
typedef enum SfStatus {
  SF_STATUS_OK = 0,
  SF_STATUS_USAGE = 1,
  SF_STATUS_PARSE = 2,
  SF_STATUS_VALIDATION = 3,
  SF_STATUS_UNDEFINED_METRIC = 4,
  SF_STATUS_NULL_ARGUMENT = 5,
  SF_STATUS_INVALID_UTF8 = 6,
  SF_STATUS_PANIC = 7,
} SfStatus;

// Input encodings accepted by `sf_schema_parse`.
typedef enum SfInputFormat {
  // JSON when the first non-blank byte is `{`, otherwise CSV.
  SF_INPUT_FORMAT_CANONICAL = 0,
  SF_INPUT_FORMAT_JSON = 1,
  SF_INPUT_FORMAT_CSV = 2,
  SF_INPUT_FORMAT_NTRIPLES = 3,
} SfInputFormat;

typedef enum SfOutputFormat {
  SF_OUTPUT_FORMAT_CSV = 0,
  SF_OUTPUT_FORMAT_JSON = 1,
} SfOutputFormat;

// Opaque validated schema.
typedef struct SfSchema SfSchema;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *sf_last_error(void);

// # Safety
// `s` must be NULL or a string returned by this library and not yet freed.
void sf_string_free(char *s);

// Parses and validates a schema. `name` names CSV and N-Triples input and
// may be NULL (then `"schema"`); JSON input carries its own name.
//
// # Safety
// `data` must point to `len` readable bytes; `name` must be NULL or a
// NUL-terminated string; `out` must be writable.
enum SfStatus sf_schema_parse(const uint8_t *data,
                              size_t len,
                              enum SfInputFormat format,
                              const char *name,
                              struct SfSchema **out);

// # Safety
// `schema` must be NULL or a handle from this library not yet freed.
void sf_schema_free(struct SfSchema *schema);

// # Safety
// `schema` must be a valid handle.
size_t sf_schema_entity_count(const struct SfSchema *schema);

// # Safety
// `schema` must be a valid handle.
size_t sf_schema_property_count(const struct SfSchema *schema);

// # Safety
// `schema` must be a valid handle.
size_t sf_schema_warning_count(const struct SfSchema *schema);

// Borrowed warning text, valid while the handle lives; NULL when out of
// range.
//
// # Safety
// `schema` must be a valid handle.
const char *sf_schema_warning(const struct SfSchema *schema, size_t index);

// Canonical JSON of the schema.
//
// # Safety
// `schema` must be a valid handle and `out` writable.
enum SfStatus sf_schema_to_json(const struct SfSchema *schema, char **out);

// New handle with every entity type's properties unioned with its
// ancestors'.
//
// # Safety
// `schema` must be a valid handle and `out` writable.
enum SfStatus sf_schema_inherit(const struct SfSchema *schema, struct SfSchema **out);

// Focus(e), which equals Cue_er(e).
//
// # Safety
// `schema` must be a valid handle, `entity` a NUL-terminated string and
// `out` writable.
enum SfStatus sf_focus_e(const struct SfSchema *schema, const char *entity, double *out);

// # Safety
// As for `sf_focus_e`.
enum SfStatus sf_normalized_cue(const struct SfSchema *schema, const char *entity, double *out);

// # Safety
// `schema` must be a valid handle and `out` writable.
enum SfStatus sf_focus_k(const struct SfSchema *schema, double *out);

// # Safety
// `schema` must be a valid handle and `out` writable.
enum SfStatus sf_cue_cr(const struct SfSchema *schema, double *out);

// # Safety
// `schema` must be a valid handle and `out` writable.
enum SfStatus sf_balance(const struct SfSchema *schema, double *out);

// Full metric report as CSV or JSON.
//
// # Safety
// `schema` must be a valid handle and `out` writable.
enum SfStatus sf_metric_report(const struct SfSchema *schema,
                               enum SfOutputFormat format,
                               char **out);

// Ranks entity types with `metric` (`focus`, `tfidf`, `bm25`, `cmm`,
// `dem`) using default parameters. `query` (comma or space separated) is
// used by `cmm` and may be NULL.
//
// # Safety
// `schema` must be a valid handle, `metric` a NUL-terminated string,
// `query` NULL or NUL-terminated, and `out` writable.
enum SfStatus sf_rank_entities(const struct SfSchema *schema,
                               const char *metric,
                               const char *query,
                               enum SfOutputFormat format,
                               char **out);

// Tags as a JSON array of strings.
//
// # Safety
// `schema` must be a valid handle and `out` writable.
enum SfStatus sf_schema_tags(const struct SfSchema *schema, size_t k, char **out);

// Formal context in Burmeister `.cxt` form.
//
// # Safety
// `schema` must be a valid handle and `out` writable.
enum SfStatus sf_export_cxt(const struct SfSchema *schema, char **out);

// Entity type recognition for one model (`tree` or `knn`) with the default
// hyperparameter grids; writes the JSON report.
//
// # Safety
// `schema` must be a valid handle, `model` a NUL-terminated string and
// `out` writable.
enum SfStatus sf_etr_run(const struct SfSchema *schema,
                         const char *model,
                         uint64_t seed,
                         size_t per_type,
                         double retention,
                         double noise,
                         size_t outer_folds,
                         size_t inner_folds,
                         char **out);

// Spearman rank correlation of two arrays of length `n` (n ≥ 3).
//
// # Safety
// `x` and `y` must point to `n` readable doubles and `out` be writable.
enum SfStatus sf_spearman(const double *x, const double *y, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCHEMA_FOCUS_H */
