#ifndef NWSIL_SEQ_MATCH_H_
#define NWSIL_SEQ_MATCH_H_

#include <span>
#include <string>

#include <Eigen/Dense>

#include "embeddings.h"
#include "ot.h"

namespace nwsil {

// A sequence as a uniform discrete distribution over its token embeddings.
// Repeated tokens keep one atom each.
struct SeqDistribution {
  Sentence tokens;
  Eigen::VectorXd weights;  // each 1/L
  Eigen::MatrixXd embed;    // L x d

  static SeqDistribution from_tokens(const EmbeddingTable& table,
                                     std::span<const std::string> tokens);
};

struct SeqMatch {
  double distance = 0.0;  // <T, C>
  double reward = 0.0;    // <T, 1 - C>, same plan
  TransportPlan plan;
  CostMatrix cost;
};

// Sequence-level Wasserstein distance under cosine cost, over the padded
// square cost matrix.
SeqMatch seq_wasserstein(const EmbeddingTable& table,
                         std::span<const std::string> hyp,
                         std::span<const std::string> ref,
                         const IpotConfig& config = {});

double wasserstein_reward(const EmbeddingTable& table,
                          std::span<const std::string> hyp,
                          std::span<const std::string> ref,
                          const IpotConfig& config = {});

}  // namespace nwsil

#endif  // NWSIL_SEQ_MATCH_H_
