#ifndef NWSIL_OT_H_
#define NWSIL_OT_H_

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace nwsil {

// Inexact proximal point OT (IPOT) settings. The step size of each proximal
// step is 1/gamma.
struct IpotConfig {
  double gamma = 0.1;
  int outer_iters = 1000;
  int inner_sinkhorn_iters = 5;
  double feasibility_tol = 1e-6;
  double epsilon_floor = 1e-300;
  // Early stop also needs the transport cost to have stalled to this
  // relative change between two outer iterations.
  double cost_stall_tol = 1e-9;

  // Throws kInvalidArgument naming the offending field.
  void validate() const;
};

// Coupling with row marginals 1/n and column marginals 1/m.
struct TransportPlan {
  Eigen::MatrixXd values;
  double cost = 0.0;  // <values, C>
  bool converged = false;
  int iterations_used = 0;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

// Called once per outer iteration with (1-based iteration, violation, cost).
using IpotTrace = std::function<void(int, double, double)>;

TransportPlan ipot_solve(const Eigen::MatrixXd& cost,
                         const IpotConfig& config = {},
                         const IpotTrace& trace = {});

// "iter,violation,cost" debug line.
std::string format_trace_line(int iter, double violation, double cost);

struct OracleResult {
  double cost = 0.0;
  TransportPlan plan;
};

inline constexpr int kOracleMaxSize = 8;

// Exact uniform-marginal OT on a square matrix by enumerating all n!
// permutations; the optimum sits on a Birkhoff vertex.
OracleResult exact_ot_oracle(const Eigen::MatrixXd& cost);

// L1 sum of row deviations from 1/n and column deviations from 1/m.
double marginal_violation(const Eigen::MatrixXd& plan);
inline double marginal_violation(const TransportPlan& plan) {
  return marginal_violation(plan.values);
}

}  // namespace nwsil

#endif  // NWSIL_OT_H_
