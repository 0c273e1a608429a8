#ifndef NWSIL_RL_GRADIENTS_H_
#define NWSIL_RL_GRADIENTS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "embeddings.h"
#include "nested.h"
#include "ot.h"
#include "rl/env.h"
#include "rl/policy.h"
#include "rl/replay_buffer.h"
#include "rng.h"

namespace nwsil::rl {

struct Trajectory {
  int condition = 0;
  TokenSeq tokens;
  std::vector<double> step_logprobs;  // each <= 0
  double reward = 0.0;
};

// `condition` < 0 draws a condition per trajectory (conditional envs).
std::vector<Trajectory> sample_trajectories(const Policy& policy,
                                            const ToyEnv& env, int count,
                                            Rng& rng, int condition = 0);
std::vector<Trajectory> sample_trajectories(const Policy& policy,
                                            const ToyEnv& env, int count,
                                            std::uint64_t seed,
                                            int condition = 0);

// Argmax at every step, lowest token id on ties.
Trajectory greedy_decode(const Policy& policy, const ToyEnv& env,
                         int condition = 0);

// (1/K) sum_k (r_k - b_k) grad log pi(Y_k): the ascent direction.
Eigen::VectorXd reinforce_grad(std::span<const Trajectory> trajs,
                               const Policy& policy,
                               std::span<const double> baselines);
Eigen::VectorXd reinforce_grad(std::span<const Trajectory> trajs,
                               const Policy& policy, double baseline);

enum class SilVariant { kReinforce, kWsilI, kWsilD, kSilINoW, kSilDNoW };
enum class BaselineMode { kConstant, kGreedy };
enum class BufferCriterion { kReward, kF1Bleu, kNestedReward };

const char* variant_name(SilVariant v);
const char* baseline_name(BaselineMode b);
const char* criterion_name(BufferCriterion c);

// Number of RL updates between two self-imitation updates, ramping linearly
// (integer arithmetic) from `initial_every` to `final_every` over
// `ramp_steps` training steps. initial_every == 0 disables self-imitation.
struct SilSchedule {
  int initial_every = 10;
  int final_every = 1;
  int ramp_steps = 1000;

  bool enabled() const { return initial_every > 0; }
  int rl_per_sil(std::int64_t step) const;
};

struct SilConfig {
  SilVariant variant = SilVariant::kWsilI;
  double lambda_sil = 0.1;
  int k = 5;        // samples per update
  int k_prime = 5;  // buffer samples per self-imitation update
  SilSchedule schedule;
  BaselineMode baseline = BaselineMode::kConstant;
  double baseline_decay = 0.9;
  RewardScale reward_scale = RewardScale::kRaw;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
  BufferCriterion criterion = BufferCriterion::kReward;
  std::size_t buffer_capacity = 64;
  bool dedupe = true;
  // WSIL-D reference subsample size per update.
  int direct_refs = 10;
  int bleu_order = 2;
  IpotConfig ipot;

  void validate() const;
};

struct SilGradient {
  Eigen::VectorXd total;  // ascent direction actually applied
  Eigen::VectorXd sil;    // self-imitation part alone
  // Self-imitation weight per sample (WSIL-I) or per buffer entry (WSIL-D),
  // lambda included.
  std::vector<double> coefficients;
  std::optional<NestedResult> nested;
};

// Positional token agreement over the padded length; the non-Wasserstein
// matching used by the SIL-*-noW ablations.
double positional_similarity(const TokenSeq& a, const TokenSeq& b);

// K x K' sample-vs-buffer rewards and outer weights for the variant:
// nested-Wasserstein plan and r_s for W variants, uniform 1/(K K') weights
// and positional similarity for noW variants.
struct PairWeights {
  Eigen::MatrixXd weights;
  Eigen::MatrixXd rewards;
  std::optional<NestedResult> nested;
};
PairWeights pair_weights(std::span<const TokenSeq> set_a,
                         std::span<const TokenSeq> set_b,
                         const EmbeddingTable& table, const SilConfig& config);

// Indirect self-imitation: RL gradient plus, per sample k,
//   lambda * sum_j T_kj r_s(Y_k, Y_j^b) I[r(Y_j^b) > r(Y_k)]
// added to its advantage. lambda == 0 reproduces reinforce_grad bit for bit.
SilGradient wsil_i_grad(std::span<const Trajectory> trajs,
                        std::span<const BufferEntry> buffer_sample,
                        const Policy& policy, const EmbeddingTable& table,
                        const SilConfig& config,
                        std::span<const double> baselines);
SilGradient wsil_i_grad(std::span<const Trajectory> trajs,
                        std::span<const BufferEntry> buffer_sample,
                        const Policy& policy, const EmbeddingTable& table,
                        const SilConfig& config, double baseline);

// Direct self-imitation term:
//   lambda * sum_j (r_ns(Y_j^b, refs) - b_s)_+ grad log pi(Y_j^b),
// with b_s the mean nested reward of the batch.
SilGradient wsil_d_grad(std::span<const BufferEntry> buffer_sample,
                        std::span<const TokenSeq> refs, const Policy& policy,
                        const EmbeddingTable& table, const SilConfig& config);

// Reference sequences each condition's buffer criterion scores against.
struct BufferScoring {
  const EmbeddingTable* table = nullptr;
  std::vector<std::vector<TokenSeq>> refs_by_condition;
  IpotConfig ipot;
  int bleu_order = 2;
};

double buffer_score(const ReplayBuffer& buffer, const Trajectory& traj,
                    BufferCriterion criterion, const BufferScoring& scoring);

// Scores each trajectory and offers it to the buffer. Returns the number
// stored.
std::size_t buffer_update(ReplayBuffer& buffer,
                          std::span<const Trajectory> trajs,
                          BufferCriterion criterion,
                          const BufferScoring& scoring, std::int64_t step);

}  // namespace nwsil::rl

#endif  // NWSIL_RL_GRADIENTS_H_
