#include "seq_match.h"

#include "error.h"

namespace nwsil {

SeqDistribution SeqDistribution::from_tokens(
    const EmbeddingTable& table, std::span<const std::string> tokens) {
  SeqDistribution d;
  d.tokens.assign(tokens.begin(), tokens.end());
  d.embed = table.resolve(tokens);
  const auto len = static_cast<Eigen::Index>(tokens.size());
  d.weights = Eigen::VectorXd::Constant(len, 1.0 / static_cast<double>(len));
  return d;
}

SeqMatch seq_wasserstein(const EmbeddingTable& table,
                         std::span<const std::string> hyp,
                         std::span<const std::string> ref,
                         const IpotConfig& config) {
  SeqMatch out;
  out.cost = build_cost_matrix(table, hyp, ref);
  out.plan = ipot_solve(out.cost.values, config);
  out.distance = out.plan.cost;
  out.reward =
      out.plan.values.cwiseProduct((1.0 - out.cost.values.array()).matrix())
          .sum();
  return out;
}

double wasserstein_reward(const EmbeddingTable& table,
                          std::span<const std::string> hyp,
                          std::span<const std::string> ref,
                          const IpotConfig& config) {
  return seq_wasserstein(table, hyp, ref, config).reward;
}

}  // namespace nwsil
