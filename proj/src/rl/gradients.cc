#include "rl/gradients.h"

#include <algorithm>
#include <cmath>

#include "error.h"
#include "text_metrics.h"

namespace nwsil::rl {

std::vector<Trajectory> sample_trajectories(const Policy& policy,
                                            const ToyEnv& env, int count,
                                            Rng& rng, int condition) {
  if (count < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "sample_trajectories: count must be >= 1");
  }
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Trajectory tr;
    tr.condition = condition;
    if (condition < 0) {
      tr.condition = static_cast<int>(
          rng.below(static_cast<std::uint64_t>(env.num_conditions())));
    }
    int prev = -1;
    for (int t = 0; t < env.horizon(); ++t) {
      const Eigen::VectorXd p = policy.probs(tr.condition, t, prev);
      const int a = static_cast<int>(rng.categorical(
          std::span<const double>(p.data(), static_cast<std::size_t>(p.size()))));
      tr.tokens.push_back(a);
      prev = a;
    }
    tr.step_logprobs = policy.step_log_probs(tr.tokens, tr.condition);
    tr.reward = env.reward(tr.tokens, tr.condition);
    out.push_back(std::move(tr));
  }
  return out;
}

std::vector<Trajectory> sample_trajectories(const Policy& policy,
                                            const ToyEnv& env, int count,
                                            std::uint64_t seed,
                                            int condition) {
  Rng rng(seed);
  return sample_trajectories(policy, env, count, rng, condition);
}

Trajectory greedy_decode(const Policy& policy, const ToyEnv& env,
                         int condition) {
  Trajectory tr;
  tr.condition = condition;
  int prev = -1;
  for (int t = 0; t < env.horizon(); ++t) {
    const int a = argmax_lowest(policy.logits(condition, t, prev));
    tr.tokens.push_back(a);
    prev = a;
  }
  tr.step_logprobs = policy.step_log_probs(tr.tokens, condition);
  tr.reward = env.reward(tr.tokens, condition);
  return tr;
}

Eigen::VectorXd reinforce_grad(std::span<const Trajectory> trajs,
                               const Policy& policy,
                               std::span<const double> baselines) {
  if (trajs.empty()) {
    throw Error(ErrorCode::kEmptyInput, "reinforce_grad: no trajectories");
  }
  if (baselines.size() != trajs.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "reinforce_grad: one baseline per trajectory required");
  }
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(policy.num_params());
  for (std::size_t k = 0; k < trajs.size(); ++k) {
    const double adv = trajs[k].reward - baselines[k];
    grad += adv * policy.grad_log_prob(trajs[k].tokens, trajs[k].condition);
  }
  grad /= static_cast<double>(trajs.size());
  return grad;
}

Eigen::VectorXd reinforce_grad(std::span<const Trajectory> trajs,
                               const Policy& policy, double baseline) {
  const std::vector<double> b(trajs.size(), baseline);
  return reinforce_grad(trajs, policy, b);
}

const char* variant_name(SilVariant v) {
  switch (v) {
    case SilVariant::kReinforce: return "reinforce";
    case SilVariant::kWsilI: return "wsil_i";
    case SilVariant::kWsilD: return "wsil_d";
    case SilVariant::kSilINoW: return "sil_i_now";
    case SilVariant::kSilDNoW: return "sil_d_now";
  }
  return "unknown";
}

const char* baseline_name(BaselineMode b) {
  return b == BaselineMode::kConstant ? "constant" : "greedy";
}

const char* criterion_name(BufferCriterion c) {
  switch (c) {
    case BufferCriterion::kReward: return "reward";
    case BufferCriterion::kF1Bleu: return "f1_bleu";
    case BufferCriterion::kNestedReward: return "nested_reward";
  }
  return "unknown";
}

int SilSchedule::rl_per_sil(std::int64_t step) const {
  if (!enabled()) return 0;
  if (ramp_steps <= 0) return final_every;
  const std::int64_t s = std::min<std::int64_t>(std::max<std::int64_t>(step, 0),
                                                ramp_steps);
  return static_cast<int>(initial_every +
                          (static_cast<std::int64_t>(final_every) -
                           initial_every) *
                              s / ramp_steps);
}

void SilConfig::validate() const {
  auto bad = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "sil config: " + what);
  };
  if (!(lambda_sil >= 0.0) || !std::isfinite(lambda_sil)) {
    bad("lambda_sil must be >= 0");
  }
  if (k < 1) bad("k must be >= 1");
  if (k_prime < 1) bad("k_prime must be >= 1");
  if (schedule.initial_every < 0 || schedule.final_every < 0) {
    bad("schedule ratios must be >= 0");
  }
  if (schedule.enabled() && schedule.final_every < 1) {
    bad("schedule final_every must be >= 1 when self-imitation is enabled");
  }
  if (schedule.ramp_steps < 0) bad("schedule ramp_steps must be >= 0");
  if (!(baseline_decay >= 0.0 && baseline_decay < 1.0)) {
    bad("baseline_decay must be in [0, 1)");
  }
  if (!(learning_rate > 0.0)) bad("learning_rate must be > 0");
  if (buffer_capacity < 1) bad("buffer_capacity must be >= 1");
  if (direct_refs < 1) bad("direct_refs must be >= 1");
  if (bleu_order < kMinBleuOrder || bleu_order > kMaxBleuOrder) {
    bad("bleu_order must be in [2, 5]");
  }
  ipot.validate();
}

double positional_similarity(const TokenSeq& a, const TokenSeq& b) {
  const std::size_t len = std::max(a.size(), b.size());
  if (len == 0) return 1.0;
  std::size_t same = 0;
  for (std::size_t t = 0; t < std::min(a.size(), b.size()); ++t) {
    if (a[t] == b[t]) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(len);
}

namespace {

bool uses_wasserstein(SilVariant v) {
  return v == SilVariant::kWsilI || v == SilVariant::kWsilD;
}

std::vector<Sentence> sentences(std::span<const TokenSeq> seqs) {
  std::vector<Sentence> out;
  out.reserve(seqs.size());
  for (const auto& s : seqs) out.push_back(to_sentence(s));
  return out;
}

}  // namespace

PairWeights pair_weights(std::span<const TokenSeq> set_a,
                         std::span<const TokenSeq> set_b,
                         const EmbeddingTable& table,
                         const SilConfig& config) {
  if (set_a.empty() || set_b.empty()) {
    throw Error(ErrorCode::kEmptyInput, "pair_weights: empty sequence set");
  }
  PairWeights pw;
  if (uses_wasserstein(config.variant)) {
    const auto a = sentences(set_a);
    const auto b = sentences(set_b);
    NestedResult nr = nested_wasserstein(table, a, b, config.ipot);
    pw.weights = nr.outer_plan.values;
    pw.rewards = nr.seq_reward;
    pw.nested = std::move(nr);
    return pw;
  }
  const auto k = static_cast<Eigen::Index>(set_a.size());
  const auto kp = static_cast<Eigen::Index>(set_b.size());
  pw.weights = Eigen::MatrixXd::Constant(k, kp, 1.0 / static_cast<double>(k * kp));
  pw.rewards.resize(k, kp);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < kp; ++j) {
      pw.rewards(i, j) = positional_similarity(set_a[static_cast<std::size_t>(i)],
                                               set_b[static_cast<std::size_t>(j)]);
    }
  }
  return pw;
}

SilGradient wsil_i_grad(std::span<const Trajectory> trajs,
                        std::span<const BufferEntry> buffer_sample,
                        const Policy& policy, const EmbeddingTable& table,
                        const SilConfig& config,
                        std::span<const double> baselines) {
  if (trajs.empty()) {
    throw Error(ErrorCode::kEmptyInput, "wsil_i_grad: no trajectories");
  }
  if (buffer_sample.empty()) {
    throw Error(ErrorCode::kEmptyInput, "wsil_i_grad: empty buffer sample");
  }
  if (baselines.size() != trajs.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "wsil_i_grad: one baseline per trajectory required");
  }
  std::vector<TokenSeq> samples;
  for (const auto& t : trajs) samples.push_back(t.tokens);
  std::vector<TokenSeq> buffered;
  for (const auto& e : buffer_sample) buffered.push_back(e.tokens);
  PairWeights pw = pair_weights(samples, buffered, table, config);

  const double k = static_cast<double>(trajs.size());
  SilGradient out;
  out.total = Eigen::VectorXd::Zero(policy.num_params());
  out.sil = Eigen::VectorXd::Zero(policy.num_params());
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    double gated = 0.0;
    for (std::size_t j = 0; j < buffer_sample.size(); ++j) {
      if (buffer_sample[j].reward > trajs[i].reward) {
        const auto r = static_cast<Eigen::Index>(i);
        const auto c = static_cast<Eigen::Index>(j);
        gated += pw.weights(r, c) * pw.rewards(r, c);
      }
    }
    if (config.reward_scale == RewardScale::kNormalized) gated *= k;
    const double coef = config.lambda_sil * gated;
    out.coefficients.push_back(coef);

    const Eigen::VectorXd g =
        policy.grad_log_prob(trajs[i].tokens, trajs[i].condition);
    const double adv = (trajs[i].reward - baselines[i]) + coef;
    out.total += adv * g;
    out.sil += coef * g;
  }
  out.total /= k;
  out.sil /= k;
  out.nested = std::move(pw.nested);
  return out;
}

SilGradient wsil_i_grad(std::span<const Trajectory> trajs,
                        std::span<const BufferEntry> buffer_sample,
                        const Policy& policy, const EmbeddingTable& table,
                        const SilConfig& config, double baseline) {
  const std::vector<double> b(trajs.size(), baseline);
  return wsil_i_grad(trajs, buffer_sample, policy, table, config, b);
}

SilGradient wsil_d_grad(std::span<const BufferEntry> buffer_sample,
                        std::span<const TokenSeq> refs, const Policy& policy,
                        const EmbeddingTable& table, const SilConfig& config) {
  if (buffer_sample.empty()) {
    throw Error(ErrorCode::kEmptyInput, "wsil_d_grad: empty buffer sample");
  }
  if (refs.empty()) {
    throw Error(ErrorCode::kEmptyInput, "wsil_d_grad: empty reference set");
  }
  std::vector<TokenSeq> buffered;
  for (const auto& e : buffer_sample) buffered.push_back(e.tokens);
  PairWeights pw = pair_weights(buffered, refs, table, config);

  const std::size_t n = buffer_sample.size();
  Eigen::VectorXd r_ns = pw.weights.cwiseProduct(pw.rewards).rowwise().sum();
  if (config.reward_scale == RewardScale::kNormalized) {
    r_ns *= static_cast<double>(n);
  }
  // Mean via deviations from the first entry, so equal rewards give a
  // baseline equal to each of them exactly.
  double dev = 0.0;
  for (Eigen::Index j = 0; j < r_ns.size(); ++j) dev += r_ns[j] - r_ns[0];
  const double b_s = r_ns[0] + dev / static_cast<double>(n);

  SilGradient out;
  out.sil = Eigen::VectorXd::Zero(policy.num_params());
  for (std::size_t j = 0; j < n; ++j) {
    const double adv = std::max(r_ns[static_cast<Eigen::Index>(j)] - b_s, 0.0);
    const double coef = config.lambda_sil * adv;
    out.coefficients.push_back(coef);
    if (coef != 0.0) {
      out.sil += coef * policy.grad_log_prob(buffer_sample[j].tokens,
                                             buffer_sample[j].condition);
    }
  }
  out.total = out.sil;
  out.nested = std::move(pw.nested);
  return out;
}

double buffer_score(const ReplayBuffer& buffer, const Trajectory& traj,
                    BufferCriterion criterion, const BufferScoring& scoring) {
  if (criterion == BufferCriterion::kReward) return traj.reward;

  const auto c = static_cast<std::size_t>(traj.condition);
  if (c >= scoring.refs_by_condition.size() ||
      scoring.refs_by_condition[c].empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "buffer criterion needs references for condition " +
                    std::to_string(traj.condition));
  }
  const auto refs = sentences(scoring.refs_by_condition[c]);
  const Sentence hyp = to_sentence(traj.tokens);

  if (criterion == BufferCriterion::kF1Bleu) {
    const double test = sentence_bleu(hyp, refs, scoring.bleu_order);
    double self = 0.0;
    const auto& held = buffer.entries(traj.condition);
    if (!held.empty()) {
      std::vector<Sentence> others;
      for (const auto& e : held) others.push_back(to_sentence(e.tokens));
      self = sentence_bleu(hyp, others, scoring.bleu_order);
    }
    return f1_bleu(test, self);
  }

  if (scoring.table == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                "nested-reward criterion needs an embedding table");
  }
  const std::vector<Sentence> one{hyp};
  const NestedResult nr = nested_wasserstein(*scoring.table, one, refs,
                                             scoring.ipot);
  return nr.per_hyp_reward[0];
}

std::size_t buffer_update(ReplayBuffer& buffer,
                          std::span<const Trajectory> trajs,
                          BufferCriterion criterion,
                          const BufferScoring& scoring, std::int64_t step) {
  std::size_t stored = 0;
  for (const auto& t : trajs) {
    BufferEntry e;
    e.condition = t.condition;
    e.tokens = t.tokens;
    e.reward = t.reward;
    e.score = buffer_score(buffer, t, criterion, scoring);
    e.insert_step = step;
    if (buffer.offer(std::move(e))) ++stored;
  }
  return stored;
}

}  // namespace nwsil::rl
