#ifndef ABT_EDIT_H
#define ABT_EDIT_H

/* Generated by cbindgen. Do not edit. */

#include <stdbool.h>
#include <stddef.h>

typedef enum AbtStatus {
  ABT_STATUS_OK = 0,
  ABT_STATUS_NULL_ARGUMENT = 1,
  ABT_STATUS_INVALID_UTF8 = 2,
  ABT_STATUS_INVALID_SPEC = 3,
  ABT_STATUS_INVALID_TREE = 4,
  ABT_STATUS_PARSE_ERROR = 5,
  ABT_STATUS_STUCK = 6,
  ABT_STATUS_FUEL_EXHAUSTED = 7,
  ABT_STATUS_PANIC = 8,
} AbtStatus;

/**
 * A tree being edited in some language.
 */
typedef struct AbtEditor AbtEditor;

/**
 * An editor-extended language.
 */
typedef struct AbtLanguage AbtLanguage;

/**
 * The message of the last failed call on this thread, or NULL. Valid until
 * the next call into this library on the same thread.
 */
const char *abt_last_error(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void abt_string_free(char *s);

/**
 * Loads a language document and adds the cursor and hole operators.
 *
 * # Safety
 * `document` must be a NUL-terminated string; `out` must be writable.
 */
enum AbtStatus abt_language_load(const char *document, struct AbtLanguage **out);

/**
 * # Safety
 * `lang` must come from [`abt_language_load`] or be NULL.
 */
void abt_language_free(struct AbtLanguage *lang);

/**
 * Starts an editor on `(cursor (hole sort))`.
 *
 * # Safety
 * `lang` must be a live language; `sort` a NUL-terminated string; `out`
 * writable.
 */
enum AbtStatus abt_editor_new(const struct AbtLanguage *lang,
                              const char *sort,
                              struct AbtEditor **out);

/**
 * Starts an editor on a tree given in s-expression form.
 *
 * # Safety
 * As for [`abt_editor_new`].
 */
enum AbtStatus abt_editor_from_tree(const struct AbtLanguage *lang,
                                    const char *tree,
                                    struct AbtEditor **out);

/**
 * # Safety
 * `ed` must come from this library or be NULL.
 */
void abt_editor_free(struct AbtEditor *ed);

/**
 * The current tree in s-expression form. Free with [`abt_string_free`].
 *
 * # Safety
 * `ed` must be a live editor.
 */
char *abt_editor_tree(const struct AbtEditor *ed);

/**
 * Runs a script with at most `fuel` steps. The tree changes only when the
 * script terminates; `steps` (may be NULL) receives the step count.
 *
 * # Safety
 * `ed` must be a live editor; `script` a NUL-terminated string.
 */
enum AbtStatus abt_editor_run(struct AbtEditor *ed, const char *script, size_t fuel, size_t *steps);

/**
 * Evaluates a condition on the subtree under the cursor.
 *
 * # Safety
 * `ed` must be a live editor; `phi` a NUL-terminated string; `out` writable.
 */
enum AbtStatus abt_editor_query(const struct AbtEditor *ed, const char *phi, bool *out);

#endif  /* ABT_EDIT_H */
