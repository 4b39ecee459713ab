/* C API for the flores wheel-legged locomotion library.
 *
 * All functions return FLORES_OK (0) on success or a negative error code;
 * flores_last_error() describes the most recent failure on the calling
 * thread. Objects returned as opaque handles are freed with the matching
 * _destroy function. JSON request strings follow the schemas documented in
 * the README; passing NULL where a JSON string is expected selects defaults.
 */

#ifndef FLORES_FLORES_H
#define FLORES_FLORES_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define FLORES_OK 0
#define FLORES_ERR_INVALID_ARGUMENT (-1)
#define FLORES_ERR_IO (-2)
#define FLORES_ERR_FORMAT (-3)
#define FLORES_ERR_DIVERGED (-4)
#define FLORES_ERR_RUNTIME (-5)

typedef int flores_status;

typedef struct flores_model flores_model;
typedef struct flores_env flores_env;
typedef struct flores_policy flores_policy;

const char* flores_version(void);

/* thread-local message for the last failed call */
const char* flores_last_error(void);

/* ---- morphology ---- */

/* morphology: "flores" or "baseline"; params_json: optional parameter file
 * contents (see configs/flores.json) */
flores_model* flores_model_create(const char* morphology, const char* params_json);
void flores_model_destroy(flores_model* model);
double flores_model_total_mass(const flores_model* model);
int flores_model_num_joints(const flores_model* model);
/* writes newline-separated violations into buf; returns the violation count
 * or a negative error code */
int flores_model_validate(const flores_model* model, char* buf, size_t buf_size);

/* ---- environment ---- */

/* env_config_json/terrain_json: optional (defaults: flat terrain, training
 * config); seed drives every random stream in the environment */
flores_env* flores_env_create(const flores_model* model, const char* env_config_json,
                              const char* terrain_json, uint64_t seed);
void flores_env_destroy(flores_env* env);
int flores_env_observation_dim(const flores_env* env); /* 53 */
int flores_env_state_dim(const flores_env* env);       /* 689 */
int flores_env_action_dim(const flores_env* env);      /* 16 */
flores_status flores_env_reset(flores_env* env, uint64_t seed, double* state_out /* 689 */);
/* reward_out: total reward; done_out: 1 terminated, 2 truncated, 0 running */
flores_status flores_env_step(flores_env* env, const double* action /* 16 */,
                              double* state_out /* 689 */, double* reward_out, int* done_out);

/* ---- policy checkpoints ---- */

flores_policy* flores_policy_load(const char* checkpoint_path);
void flores_policy_destroy(flores_policy* policy);
/* deterministic (mean) action for a full 689-entry state vector */
flores_status flores_policy_act(const flores_policy* policy, const double* state /* 689 */,
                                double* action_out /* 16 */);

/* ---- high-level runs (one call per CLI subcommand) ---- */

/* Each writes its artifacts under out_dir and, when summary_buf is non-NULL,
 * copies a JSON summary (truncated to summary_size). */
flores_status flores_train(const char* request_json, const char* out_dir, char* summary_buf,
                           size_t summary_size);
flores_status flores_eval(const char* request_json, const char* checkpoint_path,
                          const char* out_dir, char* summary_buf, size_t summary_size);
flores_status flores_replay(const char* request_json, const char* checkpoint_path,
                            const char* out_dir, char* summary_buf, size_t summary_size);
flores_status flores_compare(const char* report_a_path, const char* report_b_path,
                             const char* out_path, char* summary_buf, size_t summary_size);
flores_status flores_inspect(const char* path, char* buf, size_t buf_size);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FLORES_FLORES_H */
