#include "nwsil/nwsil.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <iostream>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "embeddings.h"
#include "error.h"
#include "kv_config.h"
#include "manifest.h"
#include "nested.h"
#include "ot.h"
#include "rng.h"
#include "seq_match.h"
#include "text_metrics.h"
#include "rl/train.h"
#include "rl/train_config.h"

struct nwsil_embeddings {
  nwsil::EmbeddingTable table;
};

struct nwsil_nested_result {
  nwsil::NestedResult result;
};

struct nwsil_manifest {
  nwsil::RunManifest manifest;
};

struct nwsil_train_config {
  nwsil::rl::TrainSetup setup;
  std::vector<std::pair<std::string, std::string>> settings;
  std::string input;
};

struct nwsil_train_result {
  nwsil::rl::TrainResult train;
  nwsil::rl::PolicySpec policy;
  int vocab_size = 0;
  int horizon = 0;
  int num_conditions = 0;
  std::optional<nwsil::rl::PairedSummary> paired;
};

namespace {

thread_local std::string g_last_error;
thread_local std::size_t g_last_line = 0;

void clear_error() {
  g_last_error.clear();
  g_last_line = 0;
}

nwsil_status set_error(nwsil_status status, const std::string& message,
                       std::size_t line = 0) {
  g_last_error = message;
  g_last_line = line;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
nwsil_status guarded(F&& body) {
  clear_error();
  try {
    body();
    return NWSIL_OK;
  } catch (const nwsil::Error& e) {
    return set_error(static_cast<nwsil_status>(e.code()), e.what(),
                     e.line().value_or(0));
  } catch (const std::bad_alloc&) {
    return set_error(NWSIL_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(NWSIL_E_INTERNAL, e.what());
  } catch (...) {
    return set_error(NWSIL_E_INTERNAL, "unknown failure");
  }
}

void require(bool ok, const char* what) {
  if (!ok) {
    throw nwsil::Error(nwsil::ErrorCode::kInvalidArgument,
                       std::string("null or invalid argument: ") + what);
  }
}

nwsil::IpotConfig to_ipot(const nwsil_ipot_config* c) {
  nwsil::IpotConfig out;
  if (c) {
    out.gamma = c->gamma;
    out.outer_iters = c->outer_iters;
    out.inner_sinkhorn_iters = c->inner_iters;
    out.feasibility_tol = c->feasibility_tol;
  }
  out.validate();
  return out;
}

std::vector<nwsil::Sentence> to_sentences(const char* const* lines,
                                          std::size_t n, bool lowercase) {
  std::vector<nwsil::Sentence> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(lines[i] != nullptr, "sentence");
    out.push_back(nwsil::tokenize(lines[i], lowercase));
  }
  return out;
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void warn_stderr(const std::string& msg) {
  std::cerr << "warning: " << msg << "\n";
}

}  // namespace

extern "C" {

const char* nwsil_version(void) { return nwsil::kToolVersion; }

const char* nwsil_status_name(nwsil_status status) {
  if (status == NWSIL_OK) return "ok";
  if (status < NWSIL_E_IO || status > NWSIL_E_INTERNAL) return "unknown";
  return nwsil::error_code_name(static_cast<nwsil::ErrorCode>(status));
}

const char* nwsil_last_error(void) { return g_last_error.c_str(); }

size_t nwsil_last_error_line(void) { return g_last_line; }

void nwsil_string_free(char* s) { std::free(s); }

void nwsil_ipot_config_default(nwsil_ipot_config* config) {
  if (!config) return;
  const nwsil::IpotConfig d;
  config->gamma = d.gamma;
  config->outer_iters = d.outer_iters;
  config->inner_iters = d.inner_sinkhorn_iters;
  config->feasibility_tol = d.feasibility_tol;
}

nwsil_status nwsil_embeddings_load(const char* path, nwsil_oov_policy oov,
                                   nwsil_embeddings** out) {
  return guarded([&] {
    require(path && out, "path/out");
    const auto policy = oov == NWSIL_OOV_HASH ? nwsil::OovPolicy::kHashFallback
                                              : nwsil::OovPolicy::kStrict;
    *out = new nwsil_embeddings{
        nwsil::EmbeddingTable::load(path, policy, warn_stderr)};
  });
}

void nwsil_embeddings_free(nwsil_embeddings* table) { delete table; }

size_t nwsil_embeddings_dim(const nwsil_embeddings* table) {
  return table ? table->table.dim() : 0;
}

size_t nwsil_embeddings_size(const nwsil_embeddings* table) {
  return table ? table->table.size() : 0;
}

nwsil_status nwsil_seq_wasserstein(const nwsil_embeddings* table,
                                   const char* hyp, const char* ref,
                                   int lowercase,
                                   const nwsil_ipot_config* config,
                                   double* distance, double* reward) {
  return guarded([&] {
    require(table && hyp && ref, "table/hyp/ref");
    const auto h = nwsil::tokenize(hyp, lowercase != 0);
    const auto r = nwsil::tokenize(ref, lowercase != 0);
    const auto m = nwsil::seq_wasserstein(table->table, h, r, to_ipot(config));
    if (distance) *distance = m.distance;
    if (reward) *reward = m.reward;
  });
}

nwsil_status nwsil_nested(const nwsil_embeddings* table,
                          const char* const* hyps, size_t num_hyps,
                          const char* const* refs, size_t num_refs,
                          int lowercase, const nwsil_ipot_config* config,
                          nwsil_nested_result** out) {
  return guarded([&] {
    require(table && out, "table/out");
    require(hyps || num_hyps == 0, "hyps");
    require(refs || num_refs == 0, "refs");
    const auto a = to_sentences(hyps, num_hyps, lowercase != 0);
    const auto b = to_sentences(refs, num_refs, lowercase != 0);
    *out = new nwsil_nested_result{
        nwsil::nested_wasserstein(table->table, a, b, to_ipot(config))};
  });
}

void nwsil_nested_free(nwsil_nested_result* result) { delete result; }

double nwsil_nested_distance(const nwsil_nested_result* result) {
  return result ? result->result.distance : 0.0;
}

int nwsil_nested_converged(const nwsil_nested_result* result) {
  return result && result->result.outer_plan.converged ? 1 : 0;
}

int nwsil_nested_iterations(const nwsil_nested_result* result) {
  return result ? result->result.outer_plan.iterations_used : 0;
}

void nwsil_nested_plan(const nwsil_nested_result* result, double* out) {
  if (!result || !out) return;
  const auto& p = result->result.outer_plan.values;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) *out++ = p(i, j);
  }
}

void nwsil_nested_seq_costs(const nwsil_nested_result* result, double* out) {
  if (!result || !out) return;
  const auto& c = result->result.seq_cost;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) *out++ = c(i, j);
  }
}

nwsil_status nwsil_nested_reward(const nwsil_nested_result* result,
                                 size_t index, nwsil_reward_scale scale,
                                 double* out) {
  return guarded([&] {
    require(result && out, "result/out");
    *out = nwsil::nested_reward(result->result, index,
                                scale == NWSIL_SCALE_NORMALIZED
                                    ? nwsil::RewardScale::kNormalized
                                    : nwsil::RewardScale::kRaw);
  });
}

nwsil_status nwsil_subsample_indices(size_t n, size_t k, uint64_t seed,
                                     size_t* out) {
  return guarded([&] {
    require(out || k == 0, "out");
    if (k > n) {
      throw nwsil::Error(nwsil::ErrorCode::kInvalidArgument,
                         "subsample: k exceeds n");
    }
    nwsil::Rng rng(seed);
    auto idx = rng.sample_without_replacement(n, k);
    std::sort(idx.begin(), idx.end());
    for (std::size_t i = 0; i < k; ++i) out[i] = idx[i];
  });
}

nwsil_status nwsil_bleu_report_compute(const char* const* hyps,
                                       size_t num_hyps,
                                       const char* const* refs,
                                       size_t num_refs, int order,
                                       int lowercase, nwsil_bleu_report* out) {
  return guarded([&] {
    require(out, "out");
    require(hyps || num_hyps == 0, "hyps");
    require(refs || num_refs == 0, "refs");
    const auto h = to_sentences(hyps, num_hyps, lowercase != 0);
    const auto r = to_sentences(refs, num_refs, lowercase != 0);
    const auto rep = nwsil::bleu_report(h, r, order);
    out->order = rep.order;
    out->test_bleu = rep.test_bleu;
    out->self_bleu = rep.self_bleu;
    out->f1_bleu = rep.f1_bleu;
  });
}

nwsil_status nwsil_sentence_bleu(const char* hyp, const char* const* refs,
                                 size_t num_refs, int order, int lowercase,
                                 double* out) {
  return guarded([&] {
    require(hyp && out, "hyp/out");
    require(refs || num_refs == 0, "refs");
    const auto r = to_sentences(refs, num_refs, lowercase != 0);
    *out = nwsil::sentence_bleu(nwsil::tokenize(hyp, lowercase != 0), r, order);
  });
}

double nwsil_f1_bleu(double test_bleu, double self_bleu) {
  return nwsil::f1_bleu(test_bleu, self_bleu);
}

nwsil_status nwsil_naive_score(const nwsil_embeddings* table, const char* hyp,
                               const char* ref, int lowercase, double* out) {
  return guarded([&] {
    require(table && hyp && ref && out, "table/hyp/ref/out");
    *out = nwsil::naive_semantic_score(table->table,
                                       nwsil::tokenize(hyp, lowercase != 0),
                                       nwsil::tokenize(ref, lowercase != 0));
  });
}

nwsil_status nwsil_sha256_file(const char* path, char out_hex[65]) {
  return guarded([&] {
    require(path && out_hex, "path/out");
    const std::string h = nwsil::sha256_file(path);
    std::memcpy(out_hex, h.c_str(), 65);
  });
}

nwsil_manifest* nwsil_manifest_new(const char* command, uint64_t seed) {
  try {
    auto* m = new nwsil_manifest;
    m->manifest.command = command ? command : "";
    m->manifest.seed = seed;
    return m;
  } catch (...) {
    return nullptr;
  }
}

void nwsil_manifest_free(nwsil_manifest* manifest) { delete manifest; }

void nwsil_manifest_set(nwsil_manifest* manifest, const char* key,
                        const char* value) {
  if (!manifest || !key) return;
  manifest->manifest.config[key] = value ? value : "";
}

nwsil_status nwsil_manifest_add_input(nwsil_manifest* manifest,
                                      const char* path) {
  return guarded([&] {
    require(manifest && path, "manifest/path");
    manifest->manifest.add_input(path);
  });
}

nwsil_status nwsil_manifest_json(const nwsil_manifest* manifest, char** out) {
  return guarded([&] {
    require(manifest && out, "manifest/out");
    *out = dup_string(manifest->manifest.to_json().dump());
  });
}

nwsil_status nwsil_train_config_load(const char* path,
                                     nwsil_train_config** out) {
  return guarded([&] {
    require(path && out, "path/out");
    const auto kv = nwsil::KvConfig::load(path);
    auto cfg = std::make_unique<nwsil_train_config>();
    cfg->setup = nwsil::rl::load_train_setup(kv);
    auto& env = cfg->setup.env;
    if (env.embedding == nwsil::rl::EmbeddingSource::kFile) {
      std::filesystem::path p(env.embedding_path);
      if (p.is_relative()) {
        p = std::filesystem::path(path).parent_path() / p;
      }
      env.embedding_path = p.string();
      cfg->input = env.embedding_path;
    }
    for (const auto& kvp : cfg->setup.resolved) cfg->settings.push_back(kvp);
    *out = cfg.release();
  });
}

void nwsil_train_config_free(nwsil_train_config* config) { delete config; }

uint64_t nwsil_train_config_seed(const nwsil_train_config* config) {
  return config ? config->setup.sil.seed : 0;
}

size_t nwsil_train_config_num_settings(const nwsil_train_config* config) {
  return config ? config->settings.size() : 0;
}

void nwsil_train_config_setting(const nwsil_train_config* config, size_t index,
                                const char** key, const char** value) {
  if (!config || index >= config->settings.size()) {
    if (key) *key = nullptr;
    if (value) *value = nullptr;
    return;
  }
  if (key) *key = config->settings[index].first.c_str();
  if (value) *value = config->settings[index].second.c_str();
}

const char* nwsil_train_config_input(const nwsil_train_config* config) {
  if (!config || config->input.empty()) return nullptr;
  return config->input.c_str();
}

nwsil_status nwsil_train_run(const nwsil_train_config* config,
                             nwsil_log_fn on_step, void* user,
                             nwsil_train_result** out) {
  return guarded([&] {
    require(config && out, "config/out");
    const auto& s = config->setup;
    const nwsil::rl::ToyEnv env(s.env);
    auto policy = nwsil::rl::make_policy(s.policy, env);
    auto res = std::make_unique<nwsil_train_result>();
    std::function<void(const nwsil::rl::StepRecord&)> cb;
    if (on_step) {
      cb = [&](const nwsil::rl::StepRecord& r) {
        const std::string line = nwsil::rl::to_json_line(r);
        on_step(line.c_str(), user);
      };
    }
    res->train = nwsil::rl::train(env, policy, s.sil, s.options, cb);
    res->policy = s.policy;
    res->vocab_size = env.vocab_size();
    res->horizon = env.horizon();
    res->num_conditions = env.num_conditions();
    if (!s.paired_seeds.empty()) {
      res->paired = nwsil::rl::run_paired_experiment(s.env, s.policy, s.sil,
                                                     s.options, s.paired_seeds);
    }
    *out = res.release();
  });
}

void nwsil_train_result_free(nwsil_train_result* result) { delete result; }

double nwsil_train_result_final_reward(const nwsil_train_result* result) {
  return result ? result->train.final_expected_reward : 0.0;
}

nwsil_status nwsil_train_result_policy_json(const nwsil_train_result* result,
                                            char** out) {
  return guarded([&] {
    require(result && out, "result/out");
    nlohmann::ordered_json j;
    j["kind"] = result->policy.kind == nwsil::rl::PolicyKind::kTabular
                    ? "tabular"
                    : "linear";
    j["vocab_size"] = result->vocab_size;
    j["horizon"] = result->horizon;
    j["num_conditions"] = result->num_conditions;
    j["temperature"] = result->policy.temperature;
    const auto& p = result->train.final_params;
    j["params"] = std::vector<double>(p.data(), p.data() + p.size());
    *out = dup_string(j.dump());
  });
}

nwsil_status nwsil_train_result_summary_json(const nwsil_train_result* result,
                                             char** out) {
  return guarded([&] {
    require(result && out, "result/out");
    const auto& t = result->train;
    nlohmann::ordered_json j;
    j["initial_expected_reward"] = t.initial_expected_reward;
    j["final_expected_reward"] = t.final_expected_reward;
    j["rl_updates"] = t.rl_updates;
    j["sil_updates"] = t.sil_updates;
    if (result->paired) {
      nlohmann::ordered_json runs = nlohmann::ordered_json::array();
      for (const auto& r : result->paired->runs) {
        runs.push_back({{"seed", r.seed},
                        {"variant_final", r.variant_final},
                        {"reinforce_final", r.reinforce_final},
                        {"variant_wins", r.variant_final >= r.reinforce_final}});
      }
      j["paired"] = {{"runs", runs},
                     {"wins", result->paired->wins},
                     {"trials", result->paired->runs.size()},
                     {"sign_test_p", result->paired->sign_test_p}};
    } else {
      j["paired"] = nullptr;
    }
    *out = dup_string(j.dump());
  });
}

}  // extern "C"
