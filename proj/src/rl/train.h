#ifndef NWSIL_RL_TRAIN_H_
#define NWSIL_RL_TRAIN_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rl/env.h"
#include "rl/gradients.h"
#include "rl/policy.h"

namespace nwsil::rl {

struct TrainOptions {
  int steps = 1000;
  // Oracle samples for the count-normalized warm start (Markov envs); the
  // overlap envs warm-start on their reference sets.
  int pretrain_corpus_size = 64;
  double pretrain_smoothing = 0.5;
  int pretrain_epochs = 200;
  // 0 evaluates only the final policy.
  int eval_every = 0;
  int eval_samples = 256;
  std::uint64_t eval_seed = 99;
  // Off by default: wall time breaks byte-identical logs.
  bool log_wall_time = false;
  bool record_params = false;
};

enum class StepKind { kRl, kSil };

struct StepRecord {
  std::int64_t step = 0;
  StepKind kind = StepKind::kRl;
  int condition = 0;
  double mean_reward = 0.0;
  double baseline = 0.0;
  std::size_t buffer_size = 0;
  double buffer_min = 0.0;
  double buffer_max = 0.0;
  double rl_grad_norm = 0.0;
  double sil_grad_norm = 0.0;
  double mean_sil_coefficient = 0.0;
  std::optional<double> expected_reward;
  std::optional<double> wall_ms;
};

struct TrainResult {
  std::vector<StepRecord> log;
  Eigen::VectorXd final_params;
  double final_expected_reward = 0.0;
  double initial_expected_reward = 0.0;
  int rl_updates = 0;
  int sil_updates = 0;
  std::vector<TokenSeq> reference_corpus;
  std::vector<Eigen::VectorXd> param_trajectory;  // after each update
};

// Pretrains `policy`, then alternates RL and self-imitation updates per the
// schedule. Deterministic given config.seed.
TrainResult train(const ToyEnv& env, Policy& policy, const SilConfig& config,
                  const TrainOptions& options,
                  const std::function<void(const StepRecord&)>& on_step = {});

// Exact for kOracleLogProb (forward recursion over the previous token);
// Monte-Carlo with a fixed seed otherwise. Averaged over conditions.
double expected_reward(const ToyEnv& env, const Policy& policy,
                       int mc_samples = 256, std::uint64_t seed = 99);

// One newline-free JSON object.
std::string to_json_line(const StepRecord& record);

const char* step_kind_name(StepKind kind);

struct PolicySpec {
  PolicyKind kind = PolicyKind::kTabular;
  double temperature = 1.0;
};

Policy make_policy(const PolicySpec& spec, const ToyEnv& env);

struct PairedRun {
  std::uint64_t seed = 0;
  double variant_final = 0.0;
  double reinforce_final = 0.0;
};

struct PairedSummary {
  std::vector<PairedRun> runs;
  int wins = 0;  // variant_final >= reinforce_final
  // One-sided sign-test p-value of observing >= wins under a fair coin.
  double sign_test_p = 1.0;
};

// For each seed, trains the configured variant and a REINFORCE-only twin
// (self-imitation disabled, same seed) from the same warm start.
PairedSummary run_paired_experiment(const EnvSpec& env_spec,
                                    const PolicySpec& policy_spec,
                                    const SilConfig& config,
                                    const TrainOptions& options,
                                    const std::vector<std::uint64_t>& seeds);

double sign_test_p_value(int wins, int trials);

}  // namespace nwsil::rl

#endif  // NWSIL_RL_TRAIN_H_
