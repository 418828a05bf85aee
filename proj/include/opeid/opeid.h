#ifndef OPEID_H
#define OPEID_H

/* C API for off-policy evaluation with partial-identification bounds under
 * overlap violations. All functions returning int use these status codes:
 *   0  success
 *   1  input error (parsing, invariants)
 *   2  infeasible assumptions (the fitted regression contradicts them)
 * On a nonzero status, *err (when non-null) receives a malloc'd message the
 * caller releases with opeid_string_free. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define OPEID_OK 0
#define OPEID_ERR_INPUT 1
#define OPEID_ERR_INFEASIBLE 2

typedef struct opeid_dataset opeid_dataset;
typedef struct opeid_result opeid_result;

/* ---- datasets ---- */

/* covariates is row-major n*p; action entries are 0/1; outcome is read only
 * where action is 1. */
int opeid_dataset_from_arrays(int n, int p, const double* covariates,
                              const double* behavior_prob, const double* eval_prob,
                              const unsigned char* action, const double* outcome,
                              opeid_dataset** out, char** err);

/* schema_json maps column names to roles, e.g.
 * {"covariates":["x1"],"behavior_prob":"pb","eval_prob":"pe",
 *  "action":"a","outcome":"y","mu_hat":"mu"} (mu_hat optional). */
int opeid_dataset_load_csv(const char* path, const char* schema_json, opeid_dataset** out,
                           char** err);

int opeid_dataset_n(const opeid_dataset* d);
int opeid_dataset_p(const opeid_dataset* d);
/* 1 if the CSV carried a mu_hat column, else 0. */
int opeid_dataset_has_mu(const opeid_dataset* d);
void opeid_dataset_free(opeid_dataset* d);

/* ---- evaluation ---- */

/* mu: fitted regression values, one per row; may be NULL when the assumption
 * set is boundedness-only (or a sentinel L). When NULL and the dataset
 * carries a mu_hat column, that column is used.
 *
 * assumptions_json, e.g.
 *   {"bounds":{"lower":0,"upper":1},
 *    "lipschitz":{"L":0.4,"metric":{"kind":"euclidean"}},
 *    "monotone":{"kind":"coordinatewise"}}
 * ("L" may be the string "inf" for the boundedness-only sentinel.)
 *
 * options_json (may be NULL or "{}"), e.g.
 *   {"estimator":"self-normalized","mode":"exact","clamp_mu":false} */
int opeid_evaluate(const opeid_dataset* d, const double* mu, const char* assumptions_json,
                   const char* options_json, opeid_result** out, char** err);

double opeid_result_lower(const opeid_result* r);
double opeid_result_upper(const opeid_result* r);
double opeid_result_psi_id(const opeid_result* r);
/* Data-driven lower bound on any admissible Lipschitz constant. */
double opeid_result_l_lower_bound(const opeid_result* r);
/* Borrowed pointer, valid while the result lives. */
const char* opeid_result_method(const opeid_result* r);
/* Full result as a malloc'd JSON string; free with opeid_string_free. */
char* opeid_result_to_json(const opeid_result* r);
void opeid_result_free(opeid_result* r);

/* ---- batch runs ---- */

/* Executes a JSON run config (commands: bounds, sweep, multi, coverage,
 * policy-study, rate-study) and writes results.json, CSV tables and
 * manifest.json. overrides_json may be NULL or carry {"L","seed","out_dir"}.
 * Returns the status codes above; infeasible runs report the smallest
 * admissible L in the error message. */
int opeid_run(const char* config_path, const char* overrides_json, char** err);

void opeid_string_free(char* s);
const char* opeid_version(void);

#ifdef __cplusplus
}
#endif

#endif /* OPEID_H */
