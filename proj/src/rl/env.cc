#include "rl/env.h"

#include <algorithm>
#include <cmath>

#include "error.h"
#include "seq_match.h"

namespace nwsil::rl {

namespace {

// Box-Muller; only used to build oracle tables, so one draw per call is fine.
double gaussian(Rng& rng) {
  double u1 = rng.uniform();
  while (u1 <= 0.0) u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::shared_ptr<const EmbeddingTable> make_table(const EnvSpec& spec) {
  const int v = spec.vocab_size;
  switch (spec.embedding) {
    case EmbeddingSource::kOneHot: {
      auto t = std::make_shared<EmbeddingTable>(static_cast<std::size_t>(v));
      std::vector<double> row(static_cast<std::size_t>(v));
      for (int i = 0; i < v; ++i) {
        std::fill(row.begin(), row.end(), 0.0);
        row[static_cast<std::size_t>(i)] = 1.0;
        t->insert(token_name(i), row);
      }
      return t;
    }
    case EmbeddingSource::kHash:
      return std::make_shared<EmbeddingTable>(
          static_cast<std::size_t>(spec.embedding_dim),
          OovPolicy::kHashFallback, spec.seed);
    case EmbeddingSource::kFile:
      return std::make_shared<EmbeddingTable>(
          EmbeddingTable::load(spec.embedding_path, OovPolicy::kStrict));
  }
  throw Error(ErrorCode::kInternal, "unhandled embedding source");
}

}  // namespace

void EnvSpec::validate() const {
  auto bad = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "env: " + what);
  };
  if (vocab_size < 2) bad("vocab_size must be >= 2");
  if (horizon < 1) bad("horizon must be >= 1");
  if (!(oracle_sharpness >= 0.0)) bad("oracle_sharpness must be >= 0");
  if (reward == RewardKind::kConditional && num_conditions < 1) {
    bad("num_conditions must be >= 1");
  }
  if (reward != RewardKind::kOracleLogProb && refs_per_condition < 1) {
    bad("refs_per_condition must be >= 1");
  }
  if (embedding == EmbeddingSource::kHash && embedding_dim < 1) {
    bad("embedding_dim must be >= 1");
  }
  ipot.validate();
}

std::string token_name(int id) { return "t" + std::to_string(id); }

Sentence to_sentence(const TokenSeq& tokens) {
  Sentence s;
  s.reserve(tokens.size());
  for (int t : tokens) s.push_back(token_name(t));
  return s;
}

const char* reward_kind_name(RewardKind kind) {
  switch (kind) {
    case RewardKind::kOracleLogProb: return "oracle_logprob";
    case RewardKind::kTargetOverlap: return "target_overlap";
    case RewardKind::kConditional: return "conditional";
  }
  return "unknown";
}

ToyEnv::ToyEnv(const EnvSpec& spec) : spec_(spec) {
  spec_.validate();
  const int v = spec_.vocab_size;
  Rng rng(spec_.seed);

  transitions_.resize(v + 1, v);
  for (int r = 0; r <= v; ++r) {
    Eigen::VectorXd logits(v);
    for (int a = 0; a < v; ++a) logits[a] = spec_.oracle_sharpness * gaussian(rng);
    logits.array() -= logits.maxCoeff();
    Eigen::VectorXd p = logits.array().exp();
    transitions_.row(r) = (p / p.sum()).transpose();
  }

  if (spec_.reward != RewardKind::kOracleLogProb) {
    references_.resize(static_cast<std::size_t>(num_conditions()));
    for (auto& refs : references_) {
      // Each condition gets its own random chain so reference sets differ.
      Eigen::MatrixXd chain(v + 1, v);
      for (int r = 0; r <= v; ++r) {
        Eigen::VectorXd logits(v);
        for (int a = 0; a < v; ++a) {
          logits[a] = spec_.oracle_sharpness * gaussian(rng);
        }
        logits.array() -= logits.maxCoeff();
        Eigen::VectorXd p = logits.array().exp();
        chain.row(r) = (p / p.sum()).transpose();
      }
      for (int k = 0; k < spec_.refs_per_condition; ++k) {
        TokenSeq seq;
        int prev = v;
        for (int t = 0; t < spec_.horizon; ++t) {
          Eigen::VectorXd row = chain.row(prev).transpose();
          prev = static_cast<int>(rng.categorical(
              std::span<const double>(row.data(), static_cast<std::size_t>(v))));
          seq.push_back(prev);
        }
        refs.push_back(std::move(seq));
      }
    }
  }
  table_ = make_table(spec_);
}

double ToyEnv::oracle_log_prob(const TokenSeq& tokens) const {
  double lp = 0.0;
  int prev = spec_.vocab_size;
  for (int a : tokens) {
    lp += std::log(transitions_(prev, a));
    prev = a;
  }
  return lp;
}

TokenSeq ToyEnv::sample_oracle(Rng& rng) const {
  TokenSeq seq;
  seq.reserve(static_cast<std::size_t>(spec_.horizon));
  int prev = spec_.vocab_size;
  for (int t = 0; t < spec_.horizon; ++t) {
    Eigen::VectorXd row = transitions_.row(prev).transpose();
    prev = static_cast<int>(rng.categorical(std::span<const double>(
        row.data(), static_cast<std::size_t>(spec_.vocab_size))));
    seq.push_back(prev);
  }
  return seq;
}

double ToyEnv::reward(const TokenSeq& tokens, int condition) const {
  if (static_cast<int>(tokens.size()) != spec_.horizon) {
    throw Error(ErrorCode::kInvalidArgument,
                "trajectory length " + std::to_string(tokens.size()) +
                    " != horizon " + std::to_string(spec_.horizon));
  }
  if (spec_.reward == RewardKind::kOracleLogProb) {
    return oracle_log_prob(tokens) / static_cast<double>(spec_.horizon);
  }
  const Sentence hyp = to_sentence(tokens);
  double best = -1.0;
  for (const auto& ref : references(condition)) {
    best = std::max(best,
                    wasserstein_reward(*table_, hyp, to_sentence(ref), spec_.ipot));
  }
  return best;
}

const std::vector<TokenSeq>& ToyEnv::references(int condition) const {
  static const std::vector<TokenSeq> kNone;
  if (spec_.reward == RewardKind::kOracleLogProb) return kNone;
  if (condition < 0 || condition >= num_conditions()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "condition " + std::to_string(condition) + " out of range");
  }
  return references_[static_cast<std::size_t>(condition)];
}

std::vector<Sentence> ToyEnv::reference_sentences(int condition) const {
  std::vector<Sentence> out;
  for (const auto& r : references(condition)) out.push_back(to_sentence(r));
  return out;
}

}  // namespace nwsil::rl
