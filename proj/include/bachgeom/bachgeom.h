#ifndef BACHGEOM_BACHGEOM_H
#define BACHGEOM_BACHGEOM_H

/* C interface to the bachgeom library.  All strings are UTF-8 JSON. */

#ifdef __cplusplus
extern "C" {
#endif

typedef struct bg_context bg_context;
typedef struct bg_metric bg_metric;

typedef enum bg_status {
  BG_OK = 0,
  BG_INVALID_ARGUMENT = 1,
  BG_INVALID_SPEC = 2,
  BG_POINT_OUTSIDE_CHART = 3,
  BG_JET_INCONSISTENT = 4,
  BG_PD_VIOLATION = 5,
  BG_INSUFFICIENT_JET_ORDER = 6,
  BG_NOT_DIMENSION_4 = 7,
  BG_NON_FINITE_VALUE = 8,
  BG_RANK_MISMATCH = 9,
  BG_FACTOR_NOT_POSITIVE = 10,
  BG_NON_PERIODIC_GRID = 11,
  BG_BACH_VANISHES = 12,
  BG_NO_CONVERGENCE = 13,
  BG_ZERO_DENOMINATOR = 14,
  BG_HYPOTHESIS_FAILED = 15,
  BG_DESCENT_STALLED = 16,
  BG_POSITIVITY_LOST = 17,
  BG_INFEASIBLE_DELTA = 18,
  BG_PHI_NOT_NEGATIVE = 19,
  BG_BACH_DEGENERATE = 20,
  BG_ALL_CANDIDATES_DEGENERATE = 21,
  BG_CONFIG_PARSE = 22,
  BG_UNKNOWN_METRIC = 23,
  BG_INTERNAL = 99
} bg_status;

const char* bg_version(void);
/* Kebab-case name of a status, e.g. "phi-not-negative". */
const char* bg_status_name(int status);
/* Nonzero when the status reports a failed mathematical hypothesis rather than a malfunction. */
int bg_status_is_hypothesis_failure(int status);

bg_context* bg_context_create(void);
void bg_context_destroy(bg_context* ctx);
/* Message of the last failing call on ctx; empty if none.  Owned by ctx. */
const char* bg_last_error(const bg_context* ctx);

/* Runs a command (curvature, deform, conformal, eigen, normalize, construct, verify, catalog)
 * on a JSON config.  *out receives the JSON result document, also on failure when one exists;
 * release it with bg_string_free. */
int bg_run(bg_context* ctx, const char* command, const char* config_json, char** out);
void bg_string_free(char* s);

/* Metric handles: a catalog name with JSON parameters ("{}" or NULL for defaults). */
int bg_metric_create(bg_context* ctx, const char* name, const char* params_json, bg_metric** out);
void bg_metric_destroy(bg_metric* m);

/* Curvature at x[4].  Arrays are row-major; any output pointer may be NULL. */
int bg_metric_curvature(bg_context* ctx, const bg_metric* m, const double* x, double* scalar,
                        double* ricci16, double* bach16, double* bach_norm);

#ifdef __cplusplus
}
#endif

#endif
