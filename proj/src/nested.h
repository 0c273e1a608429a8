#ifndef NWSIL_NESTED_H_
#define NWSIL_NESTED_H_

#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "embeddings.h"
#include "ot.h"

namespace nwsil {

// Raw r_ns carries the outer plan's 1/K row mass; Normalized multiplies by K.
enum class RewardScale { kRaw, kNormalized };

struct NestedResult {
  Eigen::MatrixXd seq_cost;    // K x K' pairwise W_c
  Eigen::MatrixXd seq_reward;  // K x K' pairwise r_s
  TransportPlan outer_plan;    // over sequences
  double distance = 0.0;       // W_nc = <outer_plan, seq_cost>
  Eigen::VectorXd per_hyp_reward;  // raw r_ns, length K

  Eigen::Index num_hyps() const { return seq_cost.rows(); }
  Eigen::Index num_refs() const { return seq_cost.cols(); }
};

// Inner IPOT per sequence pair, then an outer IPOT over the K x K' matrix of
// inner distances. Identical (hyp, ref) pairs are solved once per call.
NestedResult nested_wasserstein(const EmbeddingTable& table,
                                std::span<const Sentence> set_a,
                                std::span<const Sentence> set_b,
                                const IpotConfig& config = {});

// r_ns of hypothesis i; throws kIndexOutOfRange.
double nested_reward(const NestedResult& result, std::size_t i,
                     RewardScale scale = RewardScale::kRaw);

}  // namespace nwsil

#endif  // NWSIL_NESTED_H_
