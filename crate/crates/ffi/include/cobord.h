#ifndef COBORD_H
#define COBORD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Which bivariant engine to check.
 */
typedef enum CobordEngine {
  COBORD_ENGINE_UNIVERSAL = 0,
  /**
   * The engine whose product skips a pullback; fails the axioms.
   */
  COBORD_ENGINE_SKIPPED_PULLBACK = 1,
} CobordEngine;

/**
 * Result of a call.
 */
typedef enum CobordStatus {
  COBORD_STATUS_OK = 0,
  /**
   * The computation ran and found a failing identity or axiom.
   */
  COBORD_STATUS_VIOLATION = 1,
  COBORD_STATUS_INVALID_ARGUMENT = 2,
  COBORD_STATUS_NULL_POINTER = 3,
  /**
   * The library rejected the computation, e.g. a parameter out of range.
   */
  COBORD_STATUS_COMPUTATION_FAILED = 4,
  /**
   * An internal panic was caught at the boundary.
   */
  COBORD_STATUS_PANIC = 5,
} CobordStatus;

/**
 * A formal group law with its inverse and difference law.
 */
typedef struct CobordFgl CobordFgl;

/**
 * Sizes, trial counts and seed for the bivariant checker.
 */
typedef struct CobordBudget {
  /**
   * Largest set swept exhaustively; 0 skips the sweep.
   */
  uint32_t exhaustive_size;
  /**
   * Largest set in random trials.
   */
  uint32_t max_size;
  uint32_t max_fiber;
  uint64_t trials;
  uint64_t seed;
} CobordBudget;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The universal law over the Lazard ring through coefficient degree `degree`.
 *
 * # Safety
 * `out` must be valid for a pointer write. Release the handle with [`cobord_fgl_free`].
 */
enum CobordStatus cobord_fgl_universal(uint32_t degree, struct CobordFgl **out);

/**
 * `x + y` over the integers, kept through degree `cap`.
 *
 * # Safety
 * `out` must be valid for a pointer write. Release the handle with [`cobord_fgl_free`].
 */
enum CobordStatus cobord_fgl_additive(uint32_t cap, struct CobordFgl **out);

/**
 * `x + y - beta x y` over `Z[beta, beta^-1]`, kept through degree `cap`.
 *
 * # Safety
 * `out` must be valid for a pointer write. Release the handle with [`cobord_fgl_free`].
 */
enum CobordStatus cobord_fgl_multiplicative(uint32_t cap, struct CobordFgl **out);

/**
 * Degree through which the law is known, or 0 for a null handle.
 *
 * # Safety
 * `law` must be null or a live handle.
 */
uint32_t cobord_fgl_cap(const struct CobordFgl *law);

/**
 * The law as JSON with keys `cap`, `ring`, `F`, `inverse`, `difference`.
 *
 * # Safety
 * `law` must be a live handle and `out` valid for a pointer write.
 * Release the string with [`cobord_string_free`].
 */
enum CobordStatus cobord_fgl_to_json(const struct CobordFgl *law, char **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `law` must be null or a handle not yet freed.
 */
void cobord_fgl_free(struct CobordFgl *law);

/**
 * Euler characteristic of `O(d)` on `P^n` three ways, as JSON with keys
 * `k_side`, `ch_side`, `binomial`, `agree`. Returns `Violation` if they differ.
 *
 * # Safety
 * `out` must be valid for a pointer write. Release the string with [`cobord_string_free`].
 */
enum CobordStatus cobord_hrr(uint32_t n, int64_t d, char **out);

/**
 * The checker's default budget.
 */
struct CobordBudget cobord_budget_default(void);

/**
 * Runs one bivariant check by name (`"a12"`, `"section-lemma"`, ...), or
 * every axiom for `"all"`. Writes a JSON array of reports; returns
 * `Violation` if any check found a counterexample.
 *
 * # Safety
 * `check` must be a NUL-terminated string and `out` valid for a pointer
 * write. Release the string with [`cobord_string_free`].
 */
enum CobordStatus cobord_bivariant_check(const char *check,
                                         struct CobordBudget budget,
                                         enum CobordEngine engine,
                                         char **out);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void cobord_string_free(char *s);

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into the library on the same thread.
 */
const char *cobord_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COBORD_H */
