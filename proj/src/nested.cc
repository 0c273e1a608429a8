#include "nested.h"

#include <map>
#include <utility>

#include "error.h"
#include "seq_match.h"

namespace nwsil {

NestedResult nested_wasserstein(const EmbeddingTable& table,
                                std::span<const Sentence> set_a,
                                std::span<const Sentence> set_b,
                                const IpotConfig& config) {
  if (set_a.empty() || set_b.empty()) {
    throw Error(ErrorCode::kEmptyInput,
                "nested_wasserstein needs two nonempty sequence sets");
  }
  const auto k = static_cast<Eigen::Index>(set_a.size());
  const auto kp = static_cast<Eigen::Index>(set_b.size());

  NestedResult res;
  res.seq_cost.resize(k, kp);
  res.seq_reward.resize(k, kp);

  std::map<std::pair<Sentence, Sentence>, std::pair<double, double>> memo;
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < kp; ++j) {
      const Sentence& a = set_a[static_cast<std::size_t>(i)];
      const Sentence& b = set_b[static_cast<std::size_t>(j)];
      auto key = std::make_pair(a, b);
      auto it = memo.find(key);
      if (it == memo.end()) {
        try {
          SeqMatch m = seq_wasserstein(table, a, b, config);
          it = memo.emplace(std::move(key), std::make_pair(m.distance, m.reward))
                   .first;
        } catch (const Error& e) {
          throw Error(e.code(),
                      "pair (" + std::to_string(i) + ", " + std::to_string(j) +
                          "): " + e.what(),
                      e.line());
        }
      }
      res.seq_cost(i, j) = it->second.first;
      res.seq_reward(i, j) = it->second.second;
    }
  }

  res.outer_plan = ipot_solve(res.seq_cost, config);
  res.distance = res.outer_plan.cost;
  res.per_hyp_reward =
      res.outer_plan.values.cwiseProduct(res.seq_reward).rowwise().sum();
  return res;
}

double nested_reward(const NestedResult& result, std::size_t i,
                     RewardScale scale) {
  if (i >= static_cast<std::size_t>(result.per_hyp_reward.size())) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "nested_reward: index " + std::to_string(i) +
                    " out of range for K = " +
                    std::to_string(result.per_hyp_reward.size()));
  }
  const double raw = result.per_hyp_reward[static_cast<Eigen::Index>(i)];
  if (scale == RewardScale::kNormalized) {
    return raw * static_cast<double>(result.per_hyp_reward.size());
  }
  return raw;
}

}  // namespace nwsil
