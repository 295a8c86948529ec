/*
 * C API for the mcnest tree-search library.
 *
 * All functions return a mcnest_status; 0 is success. On failure,
 * mcnest_last_error() returns a thread-local message describing what went
 * wrong. Objects are opaque handles created and destroyed through this API.
 * Strings returned through char** out-parameters are heap copies the caller
 * releases with mcnest_string_free().
 */

#ifndef MCNEST_H
#define MCNEST_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MCNEST_API __declspec(dllexport)
#else
#define MCNEST_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mcnest_status {
  MCNEST_OK = 0,
  MCNEST_ERR_INVALID_ARGUMENT,
  MCNEST_ERR_STRUCTURE,
  MCNEST_ERR_PRECONDITION,
  MCNEST_ERR_CONFIG,
  MCNEST_ERR_PARSE,
  MCNEST_ERR_VALIDATION,
  MCNEST_ERR_REFINE_PARSE,
  MCNEST_ERR_REWARD_PARSE,
  MCNEST_ERR_REWARD_RANGE,
  MCNEST_ERR_QUALITY_PARSE,
  MCNEST_ERR_TRANSPORT,
  MCNEST_ERR_TIMEOUT,
  MCNEST_ERR_TRANSCRIPT,
  MCNEST_ERR_INIT,
  MCNEST_ERR_IO,
  MCNEST_ERR_INTERNAL,
} mcnest_status;

typedef struct mcnest_client mcnest_client;
typedef struct mcnest_config mcnest_config;
typedef struct mcnest_result mcnest_result;

MCNEST_API const char* mcnest_version(void);
MCNEST_API const char* mcnest_status_name(mcnest_status status);

/* Thread-local message for the last failed call on this thread. */
MCNEST_API const char* mcnest_last_error(void);

MCNEST_API void mcnest_string_free(char* text);

/* ---- model clients ---------------------------------------------------- */

/* Chat-completions client. Pass NULL/empty to fall back to the
 * MODEL_API_BASE / MODEL_API_KEY / MODEL_NAME environment variables. */
MCNEST_API mcnest_status mcnest_client_open_http(const char* base_url, const char* api_key,
                                                 const char* model_name, mcnest_client** out);

/* Deterministic scripted client replaying {match?, response} entries. */
MCNEST_API mcnest_status mcnest_client_open_transcript_file(const char* path,
                                                            mcnest_client** out);
MCNEST_API mcnest_status mcnest_client_open_transcript_json(const char* json_text,
                                                            mcnest_client** out);

MCNEST_API long long mcnest_client_call_count(const mcnest_client* client);
MCNEST_API void mcnest_client_close(mcnest_client* client);

/* ---- search configuration --------------------------------------------- */

MCNEST_API mcnest_status mcnest_config_create(mcnest_config** out);
MCNEST_API void mcnest_config_destroy(mcnest_config* config);

/* Integer/boolean keys: rollouts, max_children, seed, retry_budget,
 * reward_min, reward_max, reward_limit, excess_penalty, uniform_bonus,
 * strict_fully_expanded, reeval_on_visit, continue_on_error, workers. */
MCNEST_API mcnest_status mcnest_config_set_int(mcnest_config* config, const char* key,
                                               long long value);

/* Floating keys: exploration_c, epsilon, lambda, alpha, beta, gamma. */
MCNEST_API mcnest_status mcnest_config_set_double(mcnest_config* config, const char* key,
                                                  double value);

/* String keys: policy (greedy|is|pis), init (dummy|zero_shot_cot),
 * prompts_dir. */
MCNEST_API mcnest_status mcnest_config_set_string(mcnest_config* config, const char* key,
                                                  const char* value);

/* ---- single search ----------------------------------------------------- */

/* Runs the full search over one problem statement. On a rollout failure the
 * error status is returned and, when out is non-NULL, *out still receives a
 * result handle holding the partial tree and trace. */
MCNEST_API mcnest_status mcnest_solve(mcnest_client* client, const mcnest_config* config,
                                      const char* problem_statement, mcnest_result** out);

MCNEST_API const char* mcnest_result_final_answer(const mcnest_result* result);
MCNEST_API long long mcnest_result_final_node(const mcnest_result* result);
MCNEST_API long long mcnest_result_model_calls(const mcnest_result* result);
MCNEST_API long long mcnest_result_elapsed_ms(const mcnest_result* result);
MCNEST_API int mcnest_result_rollouts_executed(const mcnest_result* result);
MCNEST_API int mcnest_result_node_count(const mcnest_result* result);

/* Serialized tree dump / full run record; free with mcnest_string_free. */
MCNEST_API mcnest_status mcnest_result_tree_json(const mcnest_result* result, char** out);
MCNEST_API mcnest_status mcnest_result_record_json(const mcnest_result* result,
                                                   const char* problem_id, char** out);

MCNEST_API void mcnest_result_destroy(mcnest_result* result);

/* ---- batch commands ----------------------------------------------------
 * Each writes its outputs under out_dir and hands back a JSON summary
 * (free with mcnest_string_free; pass NULL to skip). */

MCNEST_API mcnest_status mcnest_cmd_solve(mcnest_client* client, const mcnest_config* config,
                                          const char* dataset_path, const char* out_dir,
                                          char** summary_json);

MCNEST_API mcnest_status mcnest_cmd_eval(mcnest_client* client, const mcnest_config* config,
                                         const char* dataset_path, const char* method,
                                         const char* exemplars_path_or_null,
                                         const char* out_dir, char** summary_json);

MCNEST_API mcnest_status mcnest_cmd_sweep(mcnest_client* client, const mcnest_config* config,
                                          const char* dataset_path, const int* rollout_values,
                                          size_t rollout_count, const char* out_dir,
                                          char** summary_json);

MCNEST_API mcnest_status mcnest_cmd_sim(const mcnest_config* config_or_null,
                                        const char* arms_spec, int steps, const char* strategy,
                                        long long seed, const char* out_dir,
                                        const char* out_name_or_null, char** summary_json);

MCNEST_API mcnest_status mcnest_cmd_classify(mcnest_client* client, const mcnest_config* config_or_null,
                                             const char* dataset_path, int strict,
                                             const char* out_dir, char** summary_json);

MCNEST_API mcnest_status mcnest_cmd_quality(mcnest_client* client, const mcnest_config* config_or_null,
                                            const char* input_path, int repeats,
                                            const char* out_dir, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* MCNEST_H */
