#ifndef NWSIL_RL_ENV_H_
#define NWSIL_RL_ENV_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "embeddings.h"
#include "ot.h"
#include "rng.h"

namespace nwsil::rl {

using TokenSeq = std::vector<int>;

enum class RewardKind { kOracleLogProb, kTargetOverlap, kConditional };

enum class EmbeddingSource { kOneHot, kHash, kFile };

struct EnvSpec {
  int vocab_size = 8;
  int horizon = 8;
  RewardKind reward = RewardKind::kOracleLogProb;
  std::uint64_t seed = 1;
  // Scale of the Gaussian logits behind each oracle transition row; larger
  // values give peakier rows.
  double oracle_sharpness = 2.0;
  // Conditional envs only.
  int num_conditions = 1;
  // Reference sequences per condition for the overlap rewards.
  int refs_per_condition = 4;
  EmbeddingSource embedding = EmbeddingSource::kOneHot;
  int embedding_dim = 16;    // kHash only
  std::string embedding_path;  // kFile only; tokens are "t0", "t1", ...
  IpotConfig ipot;

  void validate() const;
};

// Deterministic sequence-generation environment with fixed horizon. Token
// ids are ints in [0, V); their string form for embedding lookups is "t<id>".
//
//   kOracleLogProb: reward = mean per-step log-probability under a first-order
//                   Markov oracle.
//   kTargetOverlap: reward = max Wasserstein reward against a fixed
//                   reference set.
//   kConditional:   as kTargetOverlap, with one reference set per condition.
class ToyEnv {
 public:
  explicit ToyEnv(const EnvSpec& spec);

  const EnvSpec& spec() const { return spec_; }
  int vocab_size() const { return spec_.vocab_size; }
  int horizon() const { return spec_.horizon; }
  int num_conditions() const {
    return spec_.reward == RewardKind::kConditional ? spec_.num_conditions : 1;
  }
  bool conditional() const { return spec_.reward == RewardKind::kConditional; }

  double reward(const TokenSeq& tokens, int condition = 0) const;

  // (V + 1) x V; row V is the start distribution. Rows sum to 1.
  const Eigen::MatrixXd& transitions() const { return transitions_; }
  double oracle_log_prob(const TokenSeq& tokens) const;
  TokenSeq sample_oracle(Rng& rng) const;

  // Reference set of a condition (empty for kOracleLogProb).
  const std::vector<TokenSeq>& references(int condition) const;
  std::vector<Sentence> reference_sentences(int condition) const;

  const EmbeddingTable& embeddings() const { return *table_; }

 private:
  EnvSpec spec_;
  Eigen::MatrixXd transitions_;
  std::vector<std::vector<TokenSeq>> references_;
  std::shared_ptr<const EmbeddingTable> table_;
};

std::string token_name(int id);
Sentence to_sentence(const TokenSeq& tokens);

const char* reward_kind_name(RewardKind kind);

}  // namespace nwsil::rl

#endif  // NWSIL_RL_ENV_H_
