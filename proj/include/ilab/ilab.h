#ifndef ILAB_ILAB_H
#define ILAB_ILAB_H

/*
 * C interface to the tabular imitation-learning lab.
 *
 * Every function returns ILAB_OK or a negative error code; on failure
 * ilab_last_error() describes the problem (per thread). Strings returned
 * through char** out-parameters are owned by the caller and must be released
 * with ilab_string_free. Handles are released with the matching *_destroy.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ILAB_API __declspec(dllexport)
#else
#define ILAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum ilab_status {
    ILAB_OK = 0,
    ILAB_ERR_INVALID_ARGUMENT = -1,
    ILAB_ERR_DIMENSION = -2,
    ILAB_ERR_PARSE = -3,
    ILAB_ERR_GUARD = -4,
    ILAB_ERR_DOMAIN = -5,
    ILAB_ERR_STOCHASTIC_EXPERT = -6,
    ILAB_ERR_IO = -7,
    ILAB_ERR_INTERNAL = -99
};

typedef struct ilab_mdp_s* ilab_mdp_t;
typedef struct ilab_policy_s* ilab_policy_t;
typedef struct ilab_dataset_s* ilab_dataset_t;

ILAB_API const char* ilab_version(void);
ILAB_API const char* ilab_last_error(void);
ILAB_API void ilab_string_free(char* str);

/* MDP, policy and dataset handles (JSON formats as written by *_to_json). */
ILAB_API int ilab_mdp_from_json(ilab_mdp_t* out, const char* json);
ILAB_API int ilab_mdp_to_json(ilab_mdp_t mdp, char** out_json);
ILAB_API int ilab_mdp_dims(ilab_mdp_t mdp, int* num_states, int* num_actions, int* horizon);
ILAB_API int ilab_mdp_destroy(ilab_mdp_t mdp);

ILAB_API int ilab_policy_from_json(ilab_policy_t* out, const char* json);
ILAB_API int ilab_policy_to_json(ilab_policy_t policy, char** out_json);
ILAB_API int ilab_policy_destroy(ilab_policy_t policy);

ILAB_API int ilab_dataset_from_json(ilab_dataset_t* out, const char* json);
ILAB_API int ilab_dataset_to_json(ilab_dataset_t dataset, char** out_json);
ILAB_API int ilab_dataset_size(ilab_dataset_t dataset, size_t* out);
ILAB_API int ilab_dataset_destroy(ilab_dataset_t dataset);

/*
 * params_json: {"family": "lb_no_interaction" | "lb_known_transition" | "random",
 *               "S", "A", "H", "N", "seed", "expert": {"kind", "alpha"}}
 * Any of the three outputs may be NULL.
 */
ILAB_API int ilab_gen_instance(const char* params_json, ilab_mdp_t* out_mdp,
                               ilab_policy_t* out_expert, char** out_manifest_json);

ILAB_API int ilab_value(ilab_mdp_t mdp, ilab_policy_t policy, double* out);
ILAB_API int ilab_occupancy_json(ilab_mdp_t mdp, ilab_policy_t policy, char** out_json);
ILAB_API int ilab_sample_dataset(ilab_mdp_t mdp, ilab_policy_t expert, size_t n, uint64_t seed,
                                 ilab_dataset_t* out);

/*
 * learner_json: {"algorithm": "bc" | "mimic_emp" | "mimic_md",
 *                "completion": ..., "solver": ...}  (same keys as a run config)
 * out_info_json (may be NULL) receives {"objective", "epsilon"} for mimic_md, {} otherwise.
 * Only the dynamics of `mdp` are used.
 */
ILAB_API int ilab_learn(ilab_mdp_t mdp, ilab_dataset_t dataset, const char* learner_json,
                        uint64_t seed, ilab_policy_t* out_policy, char** out_info_json);

/* pop01 is NaN when the expert is not deterministic. */
ILAB_API int ilab_risks(ilab_mdp_t mdp, ilab_policy_t expert, ilab_policy_t learner,
                        double* out_pop01, double* out_tv);

/* Event probabilities of `policy` relative to the states visited in `d1`, [H][S][A]. */
ILAB_API int ilab_event_probabilities_json(ilab_mdp_t mdp, ilab_policy_t policy,
                                           ilab_dataset_t d1, char** out_json);

/* Experiment config JSON in, CSV text out. */
ILAB_API int ilab_run_experiment(const char* config_json, char** out_csv);

/*
 * options_json: {"x_axis": "N" | "H" | "S", "family", "algo", "bootstrap", "seed",
 *                "exclude_binding"}; NULL means defaults with x_axis N.
 */
ILAB_API int ilab_fit_rate(const char* csv, const char* options_json, char** out_fit_json);

/*
 * request_json: {"S", "H", "N", "delta" (optional), "names" (optional array)}.
 * Output is an array of {"name", "inputs", "value"} records; bounds whose
 * arguments fall outside their domain carry "error" instead of "value".
 */
ILAB_API int ilab_bounds(const char* request_json, char** out_json);

/* *out_passed is 1 iff every check in the suite passed. */
ILAB_API int ilab_verify(const char* suite, char** out_report_json, int* out_passed);

#ifdef __cplusplus
}
#endif

#endif
