#include "ot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <vector>

#include "error.h"

namespace nwsil {

void IpotConfig::validate() const {
  auto bad = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "ipot config: " + what);
  };
  if (!(gamma > 0.0) || !std::isfinite(gamma)) bad("gamma must be > 0");
  if (outer_iters < 1) bad("outer_iters must be >= 1");
  if (inner_sinkhorn_iters < 1) bad("inner_sinkhorn_iters must be >= 1");
  if (!(feasibility_tol > 0.0)) bad("feasibility_tol must be > 0");
  if (!(epsilon_floor > 0.0)) bad("epsilon_floor must be > 0");
  if (!(cost_stall_tol >= 0.0)) bad("cost_stall_tol must be >= 0");
}

TransportPlan ipot_solve(const Eigen::MatrixXd& cost, const IpotConfig& config,
                         const IpotTrace& trace) {
  config.validate();
  const Eigen::Index n = cost.rows();
  const Eigen::Index m = cost.cols();
  if (n == 0 || m == 0) {
    throw Error(ErrorCode::kEmptyInput, "ipot_solve: empty cost matrix");
  }
  if (!cost.allFinite()) {
    throw Error(ErrorCode::kNonFiniteCost, "ipot_solve: cost has NaN or Inf");
  }
  if ((cost.array() < 0.0).any()) {
    throw Error(ErrorCode::kInvalidArgument,
                "ipot_solve: cost entries must be >= 0");
  }

  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  const double floor = config.epsilon_floor;

  const Eigen::MatrixXd kernel = (-cost / config.gamma).array().exp().matrix();
  Eigen::VectorXd sigma = Eigen::VectorXd::Constant(m, 1.0 / dm);
  Eigen::VectorXd delta(n);
  Eigen::MatrixXd plan = Eigen::MatrixXd::Ones(n, m);
  Eigen::MatrixXd q(n, m);

  TransportPlan out;
  double prev_cost = 0.0;
  for (int t = 1; t <= config.outer_iters; ++t) {
    q = kernel.cwiseProduct(plan);
    for (int k = 0; k < config.inner_sinkhorn_iters; ++k) {
      delta = (dn * (q * sigma)).cwiseMax(floor).cwiseInverse();
      sigma = (dm * (q.transpose() * delta)).cwiseMax(floor).cwiseInverse();
    }
    plan = delta.asDiagonal() * q * sigma.asDiagonal();

    const double c = plan.cwiseProduct(cost).sum();
    const double violation = marginal_violation(plan);
    if (trace) trace(t, violation, c);
    out.iterations_used = t;
    if (t > 1 && violation < config.feasibility_tol &&
        std::abs(c - prev_cost) <= config.cost_stall_tol * std::abs(c)) {
      out.converged = true;
      break;
    }
    prev_cost = c;
  }
  out.values = std::move(plan);
  out.cost = out.values.cwiseProduct(cost).sum();
  return out;
}

std::string format_trace_line(int iter, double violation, double cost) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g", iter, violation, cost);
  return buf;
}

OracleResult exact_ot_oracle(const Eigen::MatrixXd& cost) {
  const Eigen::Index n = cost.rows();
  if (n != cost.cols()) {
    throw Error(ErrorCode::kInvalidArgument,
                "exact_ot_oracle needs a square matrix");
  }
  if (n == 0) {
    throw Error(ErrorCode::kEmptyInput, "exact_ot_oracle: empty matrix");
  }
  if (n > kOracleMaxSize) {
    throw Error(ErrorCode::kOracleTooLarge,
                "exact_ot_oracle enumerates n! permutations; n = " +
                    std::to_string(n) + " exceeds " +
                    std::to_string(kOracleMaxSize));
  }
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::vector<Eigen::Index> best = perm;
  double best_sum = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      s += cost(i, perm[static_cast<std::size_t>(i)]);
    }
    if (s < best_sum) {
      best_sum = s;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  OracleResult res;
  const double mass = 1.0 / static_cast<double>(n);
  res.plan.values = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    res.plan.values(i, best[static_cast<std::size_t>(i)]) = mass;
  }
  res.cost = best_sum * mass;
  res.plan.cost = res.cost;
  res.plan.converged = true;
  return res;
}

double marginal_violation(const Eigen::MatrixXd& plan) {
  if (plan.size() == 0) return 0.0;
  const double row_target = 1.0 / static_cast<double>(plan.rows());
  const double col_target = 1.0 / static_cast<double>(plan.cols());
  return (plan.rowwise().sum().array() - row_target).abs().sum() +
         (plan.colwise().sum().array() - col_target).abs().sum();
}

}  // namespace nwsil
