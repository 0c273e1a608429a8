#include "rl/train.h"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <json.hpp>

#include "error.h"

namespace nwsil::rl {

namespace {

constexpr std::uint64_t kBufferStream = 0x5eed0b0ffe12ULL;
constexpr std::uint64_t kConditionStream = 0xc0d171014aULL;
constexpr std::uint64_t kPretrainStream = 0x9e7a11ULL;

std::vector<TokenSeq> subsample(const std::vector<TokenSeq>& all,
                                std::size_t k, Rng& rng) {
  if (all.size() <= k) return all;
  auto idx = rng.sample_without_replacement(all.size(), k);
  std::sort(idx.begin(), idx.end());
  std::vector<TokenSeq> out;
  for (auto i : idx) out.push_back(all[i]);
  return out;
}

double mean_reward(const std::vector<Trajectory>& trajs) {
  double s = 0.0;
  for (const auto& t : trajs) s += t.reward;
  return s / static_cast<double>(trajs.size());
}

}  // namespace

const char* step_kind_name(StepKind kind) {
  return kind == StepKind::kRl ? "rl" : "sil";
}

Policy make_policy(const PolicySpec& spec, const ToyEnv& env) {
  return Policy(spec.kind, env.vocab_size(), env.horizon(),
                env.num_conditions(), spec.temperature);
}

double expected_reward(const ToyEnv& env, const Policy& policy,
                       int mc_samples, std::uint64_t seed) {
  const int v = env.vocab_size();
  const int conds = env.num_conditions();
  if (env.spec().reward == RewardKind::kOracleLogProb) {
    const Eigen::MatrixXd log_t = env.transitions().array().log();
    double total = 0.0;
    for (int c = 0; c < conds; ++c) {
      // mass over the previous token; index v is the start symbol
      Eigen::VectorXd mass = Eigen::VectorXd::Zero(v + 1);
      mass[v] = 1.0;
      double acc = 0.0;
      for (int t = 0; t < env.horizon(); ++t) {
        Eigen::VectorXd next = Eigen::VectorXd::Zero(v + 1);
        for (int prev = 0; prev <= v; ++prev) {
          if (mass[prev] == 0.0) continue;
          const Eigen::VectorXd p =
              policy.probs(c, t, prev == v ? -1 : prev);
          acc += mass[prev] * p.dot(log_t.row(prev).transpose());
          next.head(v) += mass[prev] * p;
        }
        mass = next;
      }
      total += acc / static_cast<double>(env.horizon());
    }
    return total / static_cast<double>(conds);
  }
  Rng rng(seed);
  double total = 0.0;
  for (int c = 0; c < conds; ++c) {
    const auto trajs = sample_trajectories(policy, env, mc_samples, rng, c);
    total += mean_reward(trajs);
  }
  return total / static_cast<double>(conds);
}

TrainResult train(const ToyEnv& env, Policy& policy, const SilConfig& config,
                  const TrainOptions& options,
                  const std::function<void(const StepRecord&)>& on_step) {
  config.validate();
  if (options.steps < 1) {
    throw Error(ErrorCode::kInvalidArgument, "train: steps must be >= 1");
  }
  if (policy.vocab_size() != env.vocab_size() ||
      policy.horizon() != env.horizon() ||
      policy.num_conditions() != env.num_conditions()) {
    throw Error(ErrorCode::kInvalidArgument,
                "train: policy shape does not match the environment");
  }

  TrainResult result;

  // MLE warm start.
  std::vector<TokenSeq> corpus;
  std::vector<int> corpus_conditions;
  if (env.spec().reward == RewardKind::kOracleLogProb) {
    Rng pre(env.spec().seed ^ kPretrainStream);
    for (int i = 0; i < options.pretrain_corpus_size; ++i) {
      corpus.push_back(env.sample_oracle(pre));
    }
  } else {
    for (int c = 0; c < env.num_conditions(); ++c) {
      for (const auto& r : env.references(c)) {
        corpus.push_back(r);
        corpus_conditions.push_back(c);
      }
    }
  }
  policy.pretrain(corpus, corpus_conditions, options.pretrain_smoothing,
                  options.pretrain_epochs);
  result.reference_corpus = corpus;
  result.initial_expected_reward =
      expected_reward(env, policy, options.eval_samples, options.eval_seed);

  BufferScoring scoring;
  scoring.table = &env.embeddings();
  scoring.ipot = config.ipot;
  scoring.bleu_order = config.bleu_order;
  if (env.spec().reward == RewardKind::kOracleLogProb) {
    scoring.refs_by_condition.push_back(corpus);
  } else {
    for (int c = 0; c < env.num_conditions(); ++c) {
      scoring.refs_by_condition.push_back(env.references(c));
    }
  }

  // Separate streams so that buffer sampling never perturbs trajectory
  // sampling: a lambda = 0 run then matches REINFORCE exactly.
  Rng sample_rng(config.seed);
  Rng buffer_rng(config.seed ^ kBufferStream);
  Rng condition_rng(config.seed ^ kConditionStream);

  ReplayBuffer buffer(config.buffer_capacity, config.dedupe);
  const bool sil_active =
      config.variant != SilVariant::kReinforce && config.schedule.enabled();
  const bool direct = config.variant == SilVariant::kWsilD ||
                      config.variant == SilVariant::kSilDNoW;

  std::optional<double> ema;
  int rl_since_sil = 0;
  const auto t0 = std::chrono::steady_clock::now();

  for (std::int64_t step = 0; step < options.steps; ++step) {
    StepRecord rec;
    rec.step = step;
    const int cond =
        env.conditional()
            ? static_cast<int>(condition_rng.below(
                  static_cast<std::uint64_t>(env.num_conditions())))
            : 0;
    rec.condition = cond;

    const auto trajs = sample_trajectories(policy, env, config.k, sample_rng, cond);
    rec.mean_reward = mean_reward(trajs);

    double b = 0.0;
    if (config.baseline == BaselineMode::kGreedy) {
      b = greedy_decode(policy, env, cond).reward;
    } else {
      b = ema.has_value() ? *ema : rec.mean_reward;
    }
    rec.baseline = b;
    const std::vector<double> baselines(trajs.size(), b);

    buffer_update(buffer, trajs, config.criterion, scoring, step);
    rec.buffer_size = buffer.size(cond);
    rec.buffer_min = buffer.min_score(cond);
    rec.buffer_max = buffer.max_score(cond);

    const bool sil_step = sil_active && buffer.size(cond) > 0 &&
                          rl_since_sil >= config.schedule.rl_per_sil(step);
    Eigen::VectorXd grad;
    if (!sil_step) {
      grad = reinforce_grad(trajs, policy, baselines);
      rec.rl_grad_norm = grad.norm();
      ++rl_since_sil;
      ++result.rl_updates;
    } else {
      rec.kind = StepKind::kSil;
      const auto sample =
          buffer.sample(cond, static_cast<std::size_t>(config.k_prime), buffer_rng);
      SilGradient sg;
      if (direct) {
        const auto refs = subsample(scoring.refs_by_condition[static_cast<std::size_t>(cond)],
                                    static_cast<std::size_t>(config.direct_refs),
                                    buffer_rng);
        const Eigen::VectorXd rl = reinforce_grad(trajs, policy, baselines);
        sg = wsil_d_grad(sample, refs, policy, env.embeddings(), config);
        rec.rl_grad_norm = rl.norm();
        grad = rl + sg.sil;
      } else {
        sg = wsil_i_grad(trajs, sample, policy, env.embeddings(), config,
                         baselines);
        rec.rl_grad_norm = (sg.total - sg.sil).norm();
        grad = std::move(sg.total);
      }
      rec.sil_grad_norm = sg.sil.norm();
      double cs = 0.0;
      for (double c : sg.coefficients) cs += c;
      if (!sg.coefficients.empty()) {
        rec.mean_sil_coefficient = cs / static_cast<double>(sg.coefficients.size());
      }
      rl_since_sil = 0;
      ++result.sil_updates;
    }

    policy.params() += config.learning_rate * grad;
    if (options.record_params) result.param_trajectory.push_back(policy.params());

    ema = ema.has_value()
              ? config.baseline_decay * *ema +
                    (1.0 - config.baseline_decay) * rec.mean_reward
              : rec.mean_reward;

    if (options.eval_every > 0 && (step + 1) % options.eval_every == 0) {
      rec.expected_reward =
          expected_reward(env, policy, options.eval_samples, options.eval_seed);
    }
    if (options.log_wall_time) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    }
    if (on_step) on_step(rec);
    result.log.push_back(std::move(rec));
  }

  result.final_params = policy.params();
  result.final_expected_reward =
      expected_reward(env, policy, options.eval_samples, options.eval_seed);
  return result;
}

std::string to_json_line(const StepRecord& r) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["kind"] = step_kind_name(r.kind);
  j["condition"] = r.condition;
  j["mean_reward"] = r.mean_reward;
  j["baseline"] = r.baseline;
  j["buffer_size"] = r.buffer_size;
  auto finite_or_null = [](double x) {
    return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json();
  };
  j["buffer_min"] = finite_or_null(r.buffer_min);
  j["buffer_max"] = finite_or_null(r.buffer_max);
  j["rl_grad_norm"] = r.rl_grad_norm;
  j["sil_grad_norm"] = r.sil_grad_norm;
  j["mean_sil_coefficient"] = r.mean_sil_coefficient;
  if (r.expected_reward) j["expected_reward"] = *r.expected_reward;
  if (r.wall_ms) j["wall_ms"] = *r.wall_ms;
  return j.dump();
}

double sign_test_p_value(int wins, int trials) {
  // P[X >= wins], X ~ Binomial(trials, 1/2)
  double p = 0.0;
  for (int x = wins; x <= trials; ++x) {
    p += std::exp(std::lgamma(trials + 1.0) - std::lgamma(x + 1.0) -
                  std::lgamma(trials - x + 1.0) - trials * std::log(2.0));
  }
  return std::min(1.0, p);
}

PairedSummary run_paired_experiment(const EnvSpec& env_spec,
                                    const PolicySpec& policy_spec,
                                    const SilConfig& config,
                                    const TrainOptions& options,
                                    const std::vector<std::uint64_t>& seeds) {
  const ToyEnv env(env_spec);
  PairedSummary summary;
  for (auto seed : seeds) {
    SilConfig with = config;
    with.seed = seed;
    SilConfig without = with;
    without.variant = SilVariant::kReinforce;

    Policy p1 = make_policy(policy_spec, env);
    Policy p2 = make_policy(policy_spec, env);
    PairedRun run;
    run.seed = seed;
    run.variant_final = train(env, p1, with, options).final_expected_reward;
    run.reinforce_final = train(env, p2, without, options).final_expected_reward;
    if (run.variant_final >= run.reinforce_final) ++summary.wins;
    summary.runs.push_back(run);
  }
  summary.sign_test_p =
      sign_test_p_value(summary.wins, static_cast<int>(seeds.size()));
  return summary;
}

}  // namespace nwsil::rl
