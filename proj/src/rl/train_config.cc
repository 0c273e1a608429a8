#include "rl/train_config.h"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "error.h"

namespace nwsil::rl {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// "3,5,8" or "0..9" (inclusive).
std::vector<std::uint64_t> parse_seed_list(const KvConfig& cfg,
                                           const std::string& key) {
  const std::string v = cfg.get_string(key, "");
  std::vector<std::uint64_t> out;
  if (v.empty()) return out;
  auto to_u64 = [&](const std::string& s) {
    std::uint64_t x = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || p != s.data() + s.size()) {
      cfg.fail(key, "expected 'a..b' or a comma list of seeds, got '" + v + "'");
    }
    return x;
  };
  const auto dots = v.find("..");
  if (dots != std::string::npos) {
    const auto lo = to_u64(v.substr(0, dots));
    const auto hi = to_u64(v.substr(dots + 2));
    if (hi < lo) cfg.fail(key, "empty seed range");
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
    return out;
  }
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b == std::string::npos) cfg.fail(key, "empty seed in list");
    out.push_back(to_u64(item.substr(b, e - b + 1)));
  }
  return out;
}

}  // namespace

TrainSetup load_train_setup(const KvConfig& cfg) {
  TrainSetup s;
  auto& r = s.resolved;

  // environment
  s.env.vocab_size = static_cast<int>(cfg.get_int("env.vocab_size", 8));
  s.env.horizon = static_cast<int>(cfg.get_int("env.horizon", 8));
  s.env.reward = cfg.get_enum<RewardKind>(
      "env.reward", RewardKind::kOracleLogProb,
      {{"oracle_logprob", RewardKind::kOracleLogProb},
       {"target_overlap", RewardKind::kTargetOverlap},
       {"conditional", RewardKind::kConditional}});
  s.env.seed = cfg.get_uint("env.seed", 1);
  s.env.oracle_sharpness = cfg.get_double("env.oracle_sharpness", 2.0);
  s.env.num_conditions = static_cast<int>(cfg.get_int("env.num_conditions", 1));
  s.env.refs_per_condition =
      static_cast<int>(cfg.get_int("env.refs_per_condition", 4));
  s.env.embedding = cfg.get_enum<EmbeddingSource>(
      "env.embedding", EmbeddingSource::kOneHot,
      {{"onehot", EmbeddingSource::kOneHot},
       {"hash", EmbeddingSource::kHash},
       {"file", EmbeddingSource::kFile}});
  s.env.embedding_dim = static_cast<int>(cfg.get_int("env.embedding_dim", 16));
  s.env.embedding_path = cfg.get_string("env.embedding_path", "");
  if (s.env.embedding == EmbeddingSource::kFile && s.env.embedding_path.empty()) {
    cfg.fail("env.embedding_path", "required when env.embedding = file");
  }

  IpotConfig ipot;
  ipot.gamma = cfg.get_double("ipot.gamma", ipot.gamma);
  ipot.outer_iters = static_cast<int>(cfg.get_int("ipot.outer_iters", ipot.outer_iters));
  ipot.inner_sinkhorn_iters =
      static_cast<int>(cfg.get_int("ipot.inner_iters", ipot.inner_sinkhorn_iters));
  ipot.feasibility_tol = cfg.get_double("ipot.feasibility_tol", ipot.feasibility_tol);
  s.env.ipot = ipot;
  s.sil.ipot = ipot;

  // policy
  s.policy.kind = cfg.get_enum<PolicyKind>(
      "policy.kind", PolicyKind::kTabular,
      {{"tabular", PolicyKind::kTabular}, {"linear", PolicyKind::kLinear}});
  s.policy.temperature = cfg.get_double("policy.temperature", 1.0);

  // self-imitation
  auto& c = s.sil;
  c.variant = cfg.get_enum<SilVariant>(
      "sil.variant", SilVariant::kWsilI,
      {{"reinforce", SilVariant::kReinforce},
       {"wsil_i", SilVariant::kWsilI},
       {"wsil_d", SilVariant::kWsilD},
       {"sil_i_now", SilVariant::kSilINoW},
       {"sil_d_now", SilVariant::kSilDNoW}});
  c.lambda_sil = cfg.get_double("sil.lambda", 0.1);
  c.k = static_cast<int>(cfg.get_int("sil.k", 5));
  c.k_prime = static_cast<int>(cfg.get_int("sil.k_prime", 5));
  c.schedule.initial_every = static_cast<int>(cfg.get_int("sil.every_initial", 10));
  c.schedule.final_every = static_cast<int>(cfg.get_int("sil.every_final", 1));
  c.schedule.ramp_steps = static_cast<int>(cfg.get_int("sil.ramp_steps", 1000));
  const bool conditional = s.env.reward == RewardKind::kConditional;
  c.baseline = cfg.get_enum<BaselineMode>(
      "sil.baseline", conditional ? BaselineMode::kGreedy : BaselineMode::kConstant,
      {{"constant", BaselineMode::kConstant}, {"greedy", BaselineMode::kGreedy}});
  c.baseline_decay = cfg.get_double("sil.baseline_decay", 0.9);
  c.reward_scale = cfg.get_enum<RewardScale>(
      "sil.reward_scale", RewardScale::kRaw,
      {{"raw", RewardScale::kRaw}, {"normalized", RewardScale::kNormalized}});
  c.direct_refs = static_cast<int>(cfg.get_int("sil.direct_refs", 10));
  c.learning_rate = cfg.get_double("train.learning_rate", 0.1);
  c.seed = cfg.get_uint("seed", 0);

  c.buffer_capacity = static_cast<std::size_t>(
      cfg.get_int("buffer.capacity", conditional ? 5 : 64));
  c.criterion = cfg.get_enum<BufferCriterion>(
      "buffer.criterion",
      conditional ? BufferCriterion::kNestedReward : BufferCriterion::kF1Bleu,
      {{"reward", BufferCriterion::kReward},
       {"f1_bleu", BufferCriterion::kF1Bleu},
       {"nested_reward", BufferCriterion::kNestedReward}});
  c.dedupe = cfg.get_bool("buffer.dedupe", true);
  c.bleu_order = static_cast<int>(cfg.get_int("buffer.bleu_order", 2));

  // run
  auto& o = s.options;
  o.steps = static_cast<int>(cfg.get_int("train.steps", 1000));
  o.pretrain_corpus_size = static_cast<int>(cfg.get_int("pretrain.corpus_size", 64));
  o.pretrain_smoothing = cfg.get_double("pretrain.smoothing", 0.5);
  o.pretrain_epochs = static_cast<int>(cfg.get_int("pretrain.epochs", 200));
  o.eval_every = static_cast<int>(cfg.get_int("eval.every", 0));
  o.eval_samples = static_cast<int>(cfg.get_int("eval.samples", 256));
  o.eval_seed = cfg.get_uint("eval.seed", 99);
  o.log_wall_time = cfg.get_bool("log.wall_time", false);

  s.paired_seeds = parse_seed_list(cfg, "experiment.paired_seeds");

  cfg.reject_unknown();

  // Domain validation, reported against the responsible key.
  auto check = [&](bool ok, const std::string& key, const std::string& what) {
    if (!ok) cfg.fail(key, what);
  };
  check(s.env.vocab_size >= 2, "env.vocab_size", "must be >= 2");
  check(s.env.horizon >= 1, "env.horizon", "must be >= 1");
  check(s.env.oracle_sharpness >= 0.0, "env.oracle_sharpness", "must be >= 0");
  check(s.env.num_conditions >= 1, "env.num_conditions", "must be >= 1");
  check(s.env.refs_per_condition >= 1, "env.refs_per_condition", "must be >= 1");
  check(s.env.embedding_dim >= 1, "env.embedding_dim", "must be >= 1");
  check(ipot.gamma > 0.0, "ipot.gamma", "must be > 0");
  check(ipot.outer_iters >= 1, "ipot.outer_iters", "must be >= 1");
  check(ipot.inner_sinkhorn_iters >= 1, "ipot.inner_iters", "must be >= 1");
  check(ipot.feasibility_tol > 0.0, "ipot.feasibility_tol", "must be > 0");
  check(s.policy.temperature > 0.0, "policy.temperature", "must be > 0");
  check(c.lambda_sil >= 0.0, "sil.lambda", "must be >= 0");
  check(c.k >= 1, "sil.k", "must be >= 1");
  check(c.k_prime >= 1, "sil.k_prime", "must be >= 1");
  check(c.schedule.initial_every >= 0, "sil.every_initial", "must be >= 0");
  check(c.schedule.final_every >= (c.schedule.enabled() ? 1 : 0),
        "sil.every_final", "must be >= 1 when sil.every_initial > 0");
  check(c.schedule.ramp_steps >= 0, "sil.ramp_steps", "must be >= 0");
  check(c.baseline_decay >= 0.0 && c.baseline_decay < 1.0, "sil.baseline_decay",
        "must be in [0, 1)");
  check(c.direct_refs >= 1, "sil.direct_refs", "must be >= 1");
  check(c.learning_rate > 0.0, "train.learning_rate", "must be > 0");
  check(cfg.get_int("buffer.capacity", 1) >= 1, "buffer.capacity", "must be >= 1");
  check(c.bleu_order >= 2 && c.bleu_order <= 5, "buffer.bleu_order",
        "must be in [2, 5]");
  check(o.steps >= 1, "train.steps", "must be >= 1");
  check(o.pretrain_corpus_size >= 0, "pretrain.corpus_size", "must be >= 0");
  check(o.pretrain_smoothing > 0.0, "pretrain.smoothing", "must be > 0");
  check(o.pretrain_epochs >= 0, "pretrain.epochs", "must be >= 0");
  check(o.eval_every >= 0, "eval.every", "must be >= 0");
  check(o.eval_samples >= 1, "eval.samples", "must be >= 1");

  r["env.vocab_size"] = std::to_string(s.env.vocab_size);
  r["env.horizon"] = std::to_string(s.env.horizon);
  r["env.reward"] = reward_kind_name(s.env.reward);
  r["env.seed"] = std::to_string(s.env.seed);
  r["env.oracle_sharpness"] = fmt(s.env.oracle_sharpness);
  r["env.num_conditions"] = std::to_string(s.env.num_conditions);
  r["env.refs_per_condition"] = std::to_string(s.env.refs_per_condition);
  r["env.embedding"] = s.env.embedding == EmbeddingSource::kOneHot ? "onehot"
                       : s.env.embedding == EmbeddingSource::kHash ? "hash"
                                                                    : "file";
  r["env.embedding_dim"] = std::to_string(s.env.embedding_dim);
  r["env.embedding_path"] = s.env.embedding_path;
  r["ipot.gamma"] = fmt(ipot.gamma);
  r["ipot.outer_iters"] = std::to_string(ipot.outer_iters);
  r["ipot.inner_iters"] = std::to_string(ipot.inner_sinkhorn_iters);
  r["ipot.feasibility_tol"] = fmt(ipot.feasibility_tol);
  r["policy.kind"] = s.policy.kind == PolicyKind::kTabular ? "tabular" : "linear";
  r["policy.temperature"] = fmt(s.policy.temperature);
  r["sil.variant"] = variant_name(c.variant);
  r["sil.lambda"] = fmt(c.lambda_sil);
  r["sil.k"] = std::to_string(c.k);
  r["sil.k_prime"] = std::to_string(c.k_prime);
  r["sil.every_initial"] = std::to_string(c.schedule.initial_every);
  r["sil.every_final"] = std::to_string(c.schedule.final_every);
  r["sil.ramp_steps"] = std::to_string(c.schedule.ramp_steps);
  r["sil.baseline"] = baseline_name(c.baseline);
  r["sil.baseline_decay"] = fmt(c.baseline_decay);
  r["sil.reward_scale"] = c.reward_scale == RewardScale::kRaw ? "raw" : "normalized";
  r["sil.direct_refs"] = std::to_string(c.direct_refs);
  r["train.learning_rate"] = fmt(c.learning_rate);
  r["train.steps"] = std::to_string(o.steps);
  r["seed"] = std::to_string(c.seed);
  r["buffer.capacity"] = std::to_string(c.buffer_capacity);
  r["buffer.criterion"] = criterion_name(c.criterion);
  r["buffer.dedupe"] = c.dedupe ? "true" : "false";
  r["buffer.bleu_order"] = std::to_string(c.bleu_order);
  r["pretrain.corpus_size"] = std::to_string(o.pretrain_corpus_size);
  r["pretrain.smoothing"] = fmt(o.pretrain_smoothing);
  r["pretrain.epochs"] = std::to_string(o.pretrain_epochs);
  r["eval.every"] = std::to_string(o.eval_every);
  r["eval.samples"] = std::to_string(o.eval_samples);
  r["eval.seed"] = std::to_string(o.eval_seed);
  r["log.wall_time"] = o.log_wall_time ? "true" : "false";
  std::string seeds;
  for (auto sd : s.paired_seeds) {
    if (!seeds.empty()) seeds += ",";
    seeds += std::to_string(sd);
  }
  r["experiment.paired_seeds"] = seeds;
  return s;
}

}  // namespace nwsil::rl
