#ifndef NWSIL_RL_POLICY_H_
#define NWSIL_RL_POLICY_H_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "embeddings.h"
#include "rl/env.h"
#include "rng.h"

namespace nwsil::rl {

enum class PolicyKind { kTabular, kLinear };

// Autoregressive softmax policy over a state (condition, position, previous
// token). The previous token of position 0 is the start symbol, index V.
//
//   kTabular: one logit row per state.
//   kLinear:  logits = W * [onehot(prev) ; onehot(position) ; onehot(cond)].
class Policy {
 public:
  Policy(PolicyKind kind, int vocab_size, int horizon, int num_conditions = 1,
         double temperature = 1.0);

  PolicyKind kind() const { return kind_; }
  int vocab_size() const { return vocab_; }
  int horizon() const { return horizon_; }
  int num_conditions() const { return conditions_; }
  double temperature() const { return temperature_; }

  Eigen::Index num_params() const { return params_.size(); }
  const Eigen::VectorXd& params() const { return params_; }
  Eigen::VectorXd& params() { return params_; }

  // `prev` is -1 at position 0.
  Eigen::VectorXd logits(int condition, int position, int prev) const;
  // softmax(logits / temperature)
  Eigen::VectorXd probs(int condition, int position, int prev) const;

  double log_prob(const TokenSeq& tokens, int condition = 0) const;
  std::vector<double> step_log_probs(const TokenSeq& tokens,
                                     int condition = 0) const;
  // Gradient of log pi(tokens) with respect to params().
  Eigen::VectorXd grad_log_prob(const TokenSeq& tokens,
                                int condition = 0) const;

  // Tabular: count-normalized fit with add-`smoothing` counts, written as
  // logits so that the softmax reproduces the smoothed frequencies.
  // Linear: `epochs` passes of full-batch gradient ascent on the corpus
  // log-likelihood.
  void pretrain(std::span<const TokenSeq> corpus,
                std::span<const int> conditions, double smoothing = 0.5,
                int epochs = 200, double learning_rate = 0.5);

 private:
  void check_state(int condition, int position, int prev) const;
  Eigen::Index tabular_offset(int condition, int position, int prev) const;
  int feature_count() const { return vocab_ + 1 + horizon_ + conditions_; }
  // Adds scale * d logits / d params (for logit-gradient `dlogits`) into out.
  void accumulate(int condition, int position, int prev,
                  const Eigen::VectorXd& dlogits, double scale,
                  Eigen::VectorXd& out) const;

  PolicyKind kind_;
  int vocab_;
  int horizon_;
  int conditions_;
  double temperature_;
  Eigen::VectorXd params_;
};

// Index of the largest entry; ties go to the lowest index.
int argmax_lowest(const Eigen::VectorXd& v);

// Temperature-sharpened softmax-weighted mean of embedding rows. Row i of
// `embeddings` is the vector of vocabulary entry i.
Eigen::VectorXd soft_argmax(const Eigen::VectorXd& logits,
                            const Eigen::MatrixXd& embeddings, double beta);
// Same, with rows taken from `table` for tokens "t0" .. "t<V-1>".
Eigen::VectorXd soft_argmax(const Eigen::VectorXd& logits,
                            const EmbeddingTable& table, double beta);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

}  // namespace nwsil::rl

#endif  // NWSIL_RL_POLICY_H_
