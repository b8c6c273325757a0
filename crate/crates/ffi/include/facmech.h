#ifndef FACMECH_H
#define FACMECH_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum FmStatus {
  FM_STATUS_OK = 0,
  FM_STATUS_INVALID_INPUT = 1,
  // An iteration hit its cap; outputs hold the best iterate.
  FM_STATUS_CONVERGENCE = 2,
  FM_STATUS_RESOURCE_CAP = 3,
  FM_STATUS_NULL_POINTER = 4,
  FM_STATUS_UNKNOWN_SCENARIO = 5,
  FM_STATUS_PANIC = 6,
} FmStatus;

typedef enum FmMetric {
  FM_METRIC_EUCLIDEAN = 0,
  FM_METRIC_MANHATTAN = 1,
} FmMetric;

typedef enum FmObjective {
  FM_OBJECTIVE_TOTAL = 0,
  FM_OBJECTIVE_MAX = 1,
} FmObjective;

// Opaque agent profile.
typedef struct FmProfile FmProfile;

// Opaque facility locations plus assignment.
typedef struct FmSolution FmSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL after a
// success. Valid until the next call on the same thread.
const char *fm_last_error(void);

// Releases a string returned by this library. NULL is ignored.
void fm_string_free(char *s);

// Builds a profile from `n` points of `dim` coordinates.
enum FmStatus fm_profile_new(const double *coords,
                             uintptr_t n,
                             uintptr_t dim,
                             enum FmMetric metric,
                             struct FmProfile **out);

void fm_profile_free(struct FmProfile *profile);

// Number of agents, or 0 for NULL.
uintptr_t fm_profile_len(const struct FmProfile *profile);

// Runs the mechanism described by `descriptor_json`, for example
// `{"kind":"multi_dim_median"}`. `capacities` may be NULL; otherwise it
// holds `m` entries.
enum FmStatus fm_run_mechanism(const struct FmProfile *profile,
                               const char *descriptor_json,
                               uintptr_t m,
                               const uintptr_t *capacities,
                               struct FmSolution **out);

void fm_solution_free(struct FmSolution *solution);

// Number of facilities, or 0 for NULL.
uintptr_t fm_solution_facility_count(const struct FmSolution *solution);

// Copies facility coordinates row-major into `out`, which holds `len`
// doubles; `len` must be at least facilities times dimension.
enum FmStatus fm_solution_locations(const struct FmSolution *solution, double *out, uintptr_t len);

// Copies the 0-based facility index of each agent into `out` (`len`
// entries, at least the agent count).
enum FmStatus fm_solution_assignment(const struct FmSolution *solution,
                                     uintptr_t *out,
                                     uintptr_t len);

// Total or maximum distance of agents to their assigned facilities.
enum FmStatus fm_evaluate(const struct FmProfile *profile,
                          const struct FmSolution *solution,
                          enum FmObjective objective,
                          double *out);

// Exact optimal uncapacitated welfare. `out_solution` may be NULL.
enum FmStatus fm_optimal_welfare(const struct FmProfile *profile,
                                 uintptr_t m,
                                 enum FmObjective objective,
                                 double *out_value,
                                 struct FmSolution **out_solution);

// Geometric median of `n` points. On `FM_STATUS_CONVERGENCE`, `out` still
// receives the best iterate.
enum FmStatus fm_geometric_median(const double *coords,
                                  uintptr_t n,
                                  uintptr_t dim,
                                  double tolerance,
                                  double *out);

// Smallest enclosing circle of points in one or two dimensions.
// `center` receives `dim` doubles.
enum FmStatus fm_smallest_enclosing_circle(const double *coords,
                                           uintptr_t n,
                                           uintptr_t dim,
                                           double *center,
                                           double *radius);

// Searches for a profitable misreport. `*out_json` receives the
// certificate as JSON, or NULL when none was found.
enum FmStatus fm_check_strategy_proofness(const struct FmProfile *profile,
                                          const char *descriptor_json,
                                          uintptr_t m,
                                          double grid_resolution,
                                          char **out_json);

// Replays a certificate printed by the CLI or returned above.
enum FmStatus fm_verify_certificate(const char *certificate_json, bool *out);

// Runs a named scenario. `report_json` may be NULL.
enum FmStatus fm_run_scenario(const char *name, bool *passed, char **report_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FACMECH_H */
