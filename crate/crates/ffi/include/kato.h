#ifndef KATO_H
#define KATO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KatoStatus {
  KATO_STATUS_OK = 0,
  // A mathematical precondition failed (invalid graph, no isomorphism, …).
  KATO_STATUS_DOMAIN_ERROR = 1,
  // Malformed text input.
  KATO_STATUS_PARSE_ERROR = 2,
  // The census hit its vertex cap; the partial report is still returned.
  KATO_STATUS_INCOMPLETE = 3,
  KATO_STATUS_NULL_POINTER = 4,
  KATO_STATUS_INVALID_UTF8 = 5,
  KATO_STATUS_PANIC = 6,
} KatoStatus;

// A Kato graph.
typedef struct KatoGraph KatoGraph;

// A finite group.
typedef struct KatoGroup KatoGroup;

// A census report.
typedef struct KatoReport KatoReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until
// the next failing call on this thread; do not free.
const char *kato_last_error(void);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void kato_string_free(char *s);

// Catalog name (`C6`, `D4`, `A5`, `C2xC2`, …) or path to a group file.
//
// # Safety
// `name` is a NUL-terminated string; `out` is writable.
enum KatoStatus kato_group_load(const char *name, struct KatoGroup **out);

// # Safety
// `g` is a valid handle; `out` is writable.
enum KatoStatus kato_group_order(const struct KatoGroup *g, uintptr_t *out);

// # Safety
// `g` is NULL or a handle not yet freed.
void kato_group_free(struct KatoGroup *g);

// Parses and validates a graph document.
//
// # Safety
// `text` is a NUL-terminated string; `out` is writable.
enum KatoStatus kato_graph_parse(const char *text, struct KatoGraph **out);

// Serializes a graph; free the result with [`kato_string_free`].
//
// # Safety
// `g` is a valid handle; `out` is writable.
enum KatoStatus kato_graph_emit(const struct KatoGraph *g, char **out);

// Betti number, cusp count and Euler characteristic `chi_num / chi_den`
// (reduced, positive denominator).
//
// # Safety
// `g` is a valid handle; all outputs are writable.
enum KatoStatus kato_graph_invariants(const struct KatoGraph *g,
                                      uintptr_t *betti,
                                      uintptr_t *cusps,
                                      int64_t *chi_num,
                                      int64_t *chi_den);

// # Safety
// `g` is a valid handle; `out` is writable.
enum KatoStatus kato_graph_stabilize(const struct KatoGraph *g, struct KatoGraph **out);

// Glues cusp `c1` of `a` to cusp `c2` of `b` along an isomorphism of the
// cusp groups.
//
// # Safety
// `a`, `b` are valid handles; `out` is writable.
enum KatoStatus kato_graph_paste(const struct KatoGraph *a,
                                 uint32_t c1,
                                 const struct KatoGraph *b,
                                 uint32_t c2,
                                 struct KatoGraph **out);

// Free rank of the abelianized Bass–Serre group.
//
// # Safety
// `g` is a valid handle; `out` is writable.
enum KatoStatus kato_graph_free_rank(const struct KatoGraph *g, uintptr_t *out);

// Hex digest of the canonical key; free with [`kato_string_free`].
//
// # Safety
// `g` is a valid handle; `out` is writable.
enum KatoStatus kato_graph_digest(const struct KatoGraph *g, char **out);

// # Safety
// `g` is NULL or a handle not yet freed.
void kato_graph_free(struct KatoGraph *g);

// Runs a census with no admissibility filter. `max_vertices == 0` selects
// the default cap. On `KATO_STATUS_INCOMPLETE` the partial report is still
// stored in `out`.
//
// # Safety
// `indices` points to `n` readable values (or may be NULL when `n == 0`);
// `group` is a valid handle; `out` is writable.
enum KatoStatus kato_census(uintptr_t genus,
                            const uintptr_t *indices,
                            uintptr_t n,
                            const struct KatoGroup *group,
                            uintptr_t max_vertices,
                            struct KatoReport **out);

// # Safety
// `r` is a valid handle; `out` is writable.
enum KatoStatus kato_report_class_count(const struct KatoReport *r, uintptr_t *out);

// Serializes a report, as a table when `table` is nonzero; free the
// result with [`kato_string_free`].
//
// # Safety
// `r` is a valid handle; `out` is writable.
enum KatoStatus kato_report_emit(const struct KatoReport *r, int32_t table, char **out);

// # Safety
// `r` is NULL or a handle not yet freed.
void kato_report_free(struct KatoReport *r);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* KATO_H */
