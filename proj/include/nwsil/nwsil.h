#ifndef NWSIL_NWSIL_H_
#define NWSIL_NWSIL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(NWSIL_BUILDING_LIBRARY)
#define NWSIL_API __declspec(dllexport)
#else
#define NWSIL_API __declspec(dllimport)
#endif
#else
#define NWSIL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every fallible call returns one; on failure the message is
 * available from nwsil_last_error() on the calling thread. */
typedef enum nwsil_status {
  NWSIL_OK = 0,
  NWSIL_E_IO = 1,
  NWSIL_E_MALFORMED_HEADER = 2,
  NWSIL_E_ARITY_MISMATCH = 3,
  NWSIL_E_ZERO_VECTOR = 4,
  NWSIL_E_RESERVED_TOKEN = 5,
  NWSIL_E_UNKNOWN_TOKEN = 6,
  NWSIL_E_DEGENERATE_VECTOR = 7,
  NWSIL_E_NON_FINITE_COST = 8,
  NWSIL_E_ORACLE_TOO_LARGE = 9,
  NWSIL_E_EMPTY_INPUT = 10,
  NWSIL_E_INDEX_OUT_OF_RANGE = 11,
  NWSIL_E_EMPTY_CORPUS = 12,
  NWSIL_E_TOO_FEW_SENTENCES = 13,
  NWSIL_E_CONFIG = 14,
  NWSIL_E_INVALID_ARGUMENT = 15,
  NWSIL_E_INTERNAL = 16
} nwsil_status;

typedef enum nwsil_oov_policy {
  NWSIL_OOV_STRICT = 0,
  NWSIL_OOV_HASH = 1
} nwsil_oov_policy;

typedef enum nwsil_reward_scale {
  NWSIL_SCALE_RAW = 0,
  NWSIL_SCALE_NORMALIZED = 1
} nwsil_reward_scale;

typedef struct nwsil_embeddings nwsil_embeddings;
typedef struct nwsil_nested_result nwsil_nested_result;
typedef struct nwsil_manifest nwsil_manifest;
typedef struct nwsil_train_config nwsil_train_config;
typedef struct nwsil_train_result nwsil_train_result;

typedef struct nwsil_ipot_config {
  double gamma;
  int outer_iters;
  int inner_iters;
  double feasibility_tol;
} nwsil_ipot_config;

typedef struct nwsil_bleu_report {
  int order;
  double test_bleu;
  double self_bleu;
  double f1_bleu;
} nwsil_bleu_report;

NWSIL_API const char* nwsil_version(void);
NWSIL_API const char* nwsil_status_name(nwsil_status status);

/* Message of the last failed call on this thread, "" if none. */
NWSIL_API const char* nwsil_last_error(void);
/* 1-based input line of the last failure, 0 when not line-specific. */
NWSIL_API size_t nwsil_last_error_line(void);

/* Strings returned through char** out-parameters are owned by the caller. */
NWSIL_API void nwsil_string_free(char* s);

NWSIL_API void nwsil_ipot_config_default(nwsil_ipot_config* config);

/* Embeddings: text file, header "V d" then "token x_1 ... x_d" per line.
 * Load warnings go to stderr. */
NWSIL_API nwsil_status nwsil_embeddings_load(const char* path,
                                             nwsil_oov_policy oov,
                                             nwsil_embeddings** out);
NWSIL_API void nwsil_embeddings_free(nwsil_embeddings* table);
NWSIL_API size_t nwsil_embeddings_dim(const nwsil_embeddings* table);
NWSIL_API size_t nwsil_embeddings_size(const nwsil_embeddings* table);

/* Sentences are passed as raw lines and split on whitespace; with
 * `lowercase` nonzero tokens are lowercased first (ASCII). */

/* Sequence Wasserstein distance and reward from one transport plan. */
NWSIL_API nwsil_status nwsil_seq_wasserstein(const nwsil_embeddings* table,
                                             const char* hyp, const char* ref,
                                             int lowercase,
                                             const nwsil_ipot_config* config,
                                             double* distance, double* reward);

NWSIL_API nwsil_status nwsil_nested(const nwsil_embeddings* table,
                                    const char* const* hyps, size_t num_hyps,
                                    const char* const* refs, size_t num_refs,
                                    int lowercase,
                                    const nwsil_ipot_config* config,
                                    nwsil_nested_result** out);
NWSIL_API void nwsil_nested_free(nwsil_nested_result* result);
NWSIL_API double nwsil_nested_distance(const nwsil_nested_result* result);
NWSIL_API int nwsil_nested_converged(const nwsil_nested_result* result);
NWSIL_API int nwsil_nested_iterations(const nwsil_nested_result* result);
/* Row-major K x K' outer plan; `out` must hold num_hyps * num_refs values. */
NWSIL_API void nwsil_nested_plan(const nwsil_nested_result* result,
                                 double* out);
/* Row-major K x K' matrix of inner sequence distances. */
NWSIL_API void nwsil_nested_seq_costs(const nwsil_nested_result* result,
                                      double* out);
NWSIL_API nwsil_status nwsil_nested_reward(const nwsil_nested_result* result,
                                           size_t index,
                                           nwsil_reward_scale scale,
                                           double* out);

/* Seeded choice of k distinct indices from [0, n), ascending. */
NWSIL_API nwsil_status nwsil_subsample_indices(size_t n, size_t k,
                                               uint64_t seed, size_t* out);

NWSIL_API nwsil_status nwsil_bleu_report_compute(
    const char* const* hyps, size_t num_hyps, const char* const* refs,
    size_t num_refs, int order, int lowercase, nwsil_bleu_report* out);
/* BLEU of one hypothesis against a reference set. */
NWSIL_API nwsil_status nwsil_sentence_bleu(const char* hyp,
                                           const char* const* refs,
                                           size_t num_refs, int order,
                                           int lowercase, double* out);
NWSIL_API double nwsil_f1_bleu(double test_bleu, double self_bleu);
NWSIL_API nwsil_status nwsil_naive_score(const nwsil_embeddings* table,
                                         const char* hyp, const char* ref,
                                         int lowercase, double* out);

NWSIL_API nwsil_status nwsil_sha256_file(const char* path, char out_hex[65]);

/* Run manifest embedded in every CLI artifact. */
NWSIL_API nwsil_manifest* nwsil_manifest_new(const char* command,
                                             uint64_t seed);
NWSIL_API void nwsil_manifest_free(nwsil_manifest* manifest);
NWSIL_API void nwsil_manifest_set(nwsil_manifest* manifest, const char* key,
                                  const char* value);
/* Hashes the file's bytes into the manifest. */
NWSIL_API nwsil_status nwsil_manifest_add_input(nwsil_manifest* manifest,
                                                const char* path);
NWSIL_API nwsil_status nwsil_manifest_json(const nwsil_manifest* manifest,
                                           char** out);

/* Training. Config is "key = value" lines; unknown keys are errors.
 * A relative env.embedding_path is resolved against the config's folder. */
NWSIL_API nwsil_status nwsil_train_config_load(const char* path,
                                               nwsil_train_config** out);
NWSIL_API void nwsil_train_config_free(nwsil_train_config* config);
NWSIL_API uint64_t nwsil_train_config_seed(const nwsil_train_config* config);
/* Number of settings with defaults filled in; read them by index. */
NWSIL_API size_t nwsil_train_config_num_settings(
    const nwsil_train_config* config);
NWSIL_API void nwsil_train_config_setting(const nwsil_train_config* config,
                                          size_t index, const char** key,
                                          const char** value);
/* Input files the run depends on (the embedding file, if any). */
NWSIL_API const char* nwsil_train_config_input(
    const nwsil_train_config* config);

/* Called once per update with a single-line JSON record. */
typedef void (*nwsil_log_fn)(const char* json_line, void* user);

/* Runs the configured training. With experiment.paired_seeds set, the
 * paired variant-vs-REINFORCE experiment runs afterwards. */
NWSIL_API nwsil_status nwsil_train_run(const nwsil_train_config* config,
                                       nwsil_log_fn on_step, void* user,
                                       nwsil_train_result** out);
NWSIL_API void nwsil_train_result_free(nwsil_train_result* result);
NWSIL_API double nwsil_train_result_final_reward(
    const nwsil_train_result* result);
/* Final policy: shapes, temperature and the parameter vector. */
NWSIL_API nwsil_status nwsil_train_result_policy_json(
    const nwsil_train_result* result, char** out);
/* Run summary, including the paired experiment when one ran. */
NWSIL_API nwsil_status nwsil_train_result_summary_json(
    const nwsil_train_result* result, char** out);

#ifdef __cplusplus
}
#endif

#endif /* NWSIL_NWSIL_H_ */
