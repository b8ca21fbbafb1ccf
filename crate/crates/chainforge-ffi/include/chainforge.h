#ifndef CHAINFORGE_H
#define CHAINFORGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Flat-norm variant: absolute (an unmatched point costs its unit mass) or
// relative (points may also leave through the boundary).
typedef enum CfFlatMode {
  CF_FLAT_MODE_ABSOLUTE = 0,
  CF_FLAT_MODE_RELATIVE = 1,
} CfFlatMode;

// Status codes. The assertion and config codes match the CLI exit codes.
typedef enum CfStatus {
  CF_STATUS_OK = 0,
  CF_STATUS_NULL_ARGUMENT = 1,
  CF_STATUS_ASSERTION_FAILED = 2,
  CF_STATUS_CONFIG_ERROR = 3,
  CF_STATUS_KERNEL_ERROR = 4,
  CF_STATUS_PANIC = 5,
} CfStatus;

// A mod-2 0-chain in the plane or in space.
typedef struct CfZeroChain CfZeroChain;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread. Valid until the next call
// that fails on the same thread; never null.
const char *cf_last_error(void);

// Empty chain in dimension 2 or 3. Returns null for other dimensions.
struct CfZeroChain *cf_zero_chain_new(uintptr_t dim);

// Add one point mod 2: adding a point already present removes it.
//
// # Safety
// `chain` must come from [`cf_zero_chain_new`]; `coords` must point to `len`
// doubles.
enum CfStatus cf_zero_chain_add_point(struct CfZeroChain *chain,
                                      const double *coords,
                                      uintptr_t len);

// Number of points of the chain; 0 for a null handle.
//
// # Safety
// `chain` must be null or come from [`cf_zero_chain_new`].
uintptr_t cf_zero_chain_mass(const struct CfZeroChain *chain);

// Flat norm of the chain in the closed unit disk (ball in 3D).
//
// # Safety
// `chain` must come from [`cf_zero_chain_new`]; `out` must be writable.
enum CfStatus cf_zero_chain_flat_norm(const struct CfZeroChain *chain,
                                      enum CfFlatMode mode,
                                      double *out);

// # Safety
// `chain` must be null or come from [`cf_zero_chain_new`], and is not used
// afterwards.
void cf_zero_chain_free(struct CfZeroChain *chain);

// Run an experiment config (the CLI's JSON, with its `pipeline` field) and
// hand out the summary JSON. Returns [`CfStatus::AssertionFailed`] with the
// summary still written when a check fails.
//
// # Safety
// `config_json` must be a NUL-terminated string; `summary_out` must be
// writable.
enum CfStatus cf_run_pipeline(const char *config_json,
                              uint64_t seed,
                              bool inject_fault,
                              char **summary_out);

// Run one acceptance preset by name or number and hand out its outcome JSON.
//
// # Safety
// `name` must be a NUL-terminated string; `outcome_out` must be writable.
enum CfStatus cf_run_preset(const char *name, uint64_t seed, char **outcome_out);

// # Safety
// `s` must be null or a string handed out by this library, not freed before.
void cf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHAINFORGE_H */
