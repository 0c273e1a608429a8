#include "rl/policy.h"

#include <cmath>

#include "error.h"

namespace nwsil::rl {

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
  return p / p.sum();
}

int argmax_lowest(const Eigen::VectorXd& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = static_cast<int>(i);
  }
  return best;
}

Policy::Policy(PolicyKind kind, int vocab_size, int horizon,
               int num_conditions, double temperature)
    : kind_(kind),
      vocab_(vocab_size),
      horizon_(horizon),
      conditions_(num_conditions),
      temperature_(temperature) {
  if (vocab_size < 2 || horizon < 1 || num_conditions < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "policy needs vocab >= 2, horizon >= 1, conditions >= 1");
  }
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorCode::kInvalidArgument, "policy temperature must be > 0");
  }
  Eigen::Index n = 0;
  if (kind == PolicyKind::kTabular) {
    n = static_cast<Eigen::Index>(conditions_) * horizon_ * (vocab_ + 1) *
        vocab_;
  } else {
    n = static_cast<Eigen::Index>(vocab_) * feature_count();
  }
  params_ = Eigen::VectorXd::Zero(n);
}

void Policy::check_state(int condition, int position, int prev) const {
  if (condition < 0 || condition >= conditions_ || position < 0 ||
      position >= horizon_ || prev < -1 || prev >= vocab_) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "policy state (condition " + std::to_string(condition) +
                    ", position " + std::to_string(position) + ", prev " +
                    std::to_string(prev) + ") out of range");
  }
}

Eigen::Index Policy::tabular_offset(int condition, int position,
                                    int prev) const {
  const int prev_idx = prev < 0 ? vocab_ : prev;
  return ((static_cast<Eigen::Index>(condition) * horizon_ + position) *
              (vocab_ + 1) +
          prev_idx) *
         vocab_;
}

Eigen::VectorXd Policy::logits(int condition, int position, int prev) const {
  check_state(condition, position, prev);
  if (kind_ == PolicyKind::kTabular) {
    return params_.segment(tabular_offset(condition, position, prev), vocab_);
  }
  const int f = feature_count();
  const int prev_idx = prev < 0 ? vocab_ : prev;
  Eigen::VectorXd z(vocab_);
  for (int a = 0; a < vocab_; ++a) {
    const Eigen::Index row = static_cast<Eigen::Index>(a) * f;
    z[a] = params_[row + prev_idx] + params_[row + vocab_ + 1 + position] +
           params_[row + vocab_ + 1 + horizon_ + condition];
  }
  return z;
}

Eigen::VectorXd Policy::probs(int condition, int position, int prev) const {
  return softmax(logits(condition, position, prev) / temperature_);
}

std::vector<double> Policy::step_log_probs(const TokenSeq& tokens,
                                           int condition) const {
  if (static_cast<int>(tokens.size()) > horizon_) {
    throw Error(ErrorCode::kInvalidArgument, "sequence longer than horizon");
  }
  std::vector<double> out;
  out.reserve(tokens.size());
  int prev = -1;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const int a = tokens[t];
    if (a < 0 || a >= vocab_) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "token id " + std::to_string(a) + " out of vocabulary");
    }
    Eigen::VectorXd z = logits(condition, static_cast<int>(t), prev) /
                        temperature_;
    const double mx = z.maxCoeff();
    const double lse = mx + std::log((z.array() - mx).exp().sum());
    out.push_back(std::min(0.0, z[a] - lse));
    prev = a;
  }
  return out;
}

double Policy::log_prob(const TokenSeq& tokens, int condition) const {
  double lp = 0.0;
  for (double x : step_log_probs(tokens, condition)) lp += x;
  return lp;
}

void Policy::accumulate(int condition, int position, int prev,
                        const Eigen::VectorXd& dlogits, double scale,
                        Eigen::VectorXd& out) const {
  if (kind_ == PolicyKind::kTabular) {
    out.segment(tabular_offset(condition, position, prev), vocab_) +=
        scale * dlogits;
    return;
  }
  const int f = feature_count();
  const int prev_idx = prev < 0 ? vocab_ : prev;
  for (int a = 0; a < vocab_; ++a) {
    const Eigen::Index row = static_cast<Eigen::Index>(a) * f;
    const double g = scale * dlogits[a];
    out[row + prev_idx] += g;
    out[row + vocab_ + 1 + position] += g;
    out[row + vocab_ + 1 + horizon_ + condition] += g;
  }
}

Eigen::VectorXd Policy::grad_log_prob(const TokenSeq& tokens,
                                      int condition) const {
  if (static_cast<int>(tokens.size()) > horizon_) {
    throw Error(ErrorCode::kInvalidArgument, "sequence longer than horizon");
  }
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
  int prev = -1;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const int pos = static_cast<int>(t);
    const int a = tokens[t];
    if (a < 0 || a >= vocab_) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "token id " + std::to_string(a) + " out of vocabulary");
    }
    // d log softmax(z / tau)_a / dz = (e_a - p) / tau
    Eigen::VectorXd d = -probs(condition, pos, prev);
    d[a] += 1.0;
    accumulate(condition, pos, prev, d, 1.0 / temperature_, grad);
    prev = a;
  }
  return grad;
}

void Policy::pretrain(std::span<const TokenSeq> corpus,
                      std::span<const int> conditions, double smoothing,
                      int epochs, double learning_rate) {
  if (corpus.empty()) return;
  if (!conditions.empty() && conditions.size() != corpus.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "pretrain: conditions must be empty or match the corpus");
  }
  auto cond_of = [&](std::size_t i) {
    return conditions.empty() ? 0 : conditions[i];
  };

  if (kind_ == PolicyKind::kTabular) {
    if (!(smoothing > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "pretrain: smoothing must be > 0 for a tabular fit");
    }
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(params_.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      int prev = -1;
      for (std::size_t t = 0; t < corpus[i].size(); ++t) {
        const int pos = static_cast<int>(t);
        check_state(cond_of(i), pos, prev);
        counts[tabular_offset(cond_of(i), pos, prev) + corpus[i][t]] += 1.0;
        prev = corpus[i][t];
      }
    }
    for (Eigen::Index off = 0; off < params_.size(); off += vocab_) {
      Eigen::ArrayXd c = counts.segment(off, vocab_).array() + smoothing;
      params_.segment(off, vocab_) =
          (temperature_ * (c / c.sum()).log()).matrix();
    }
    return;
  }

  const double scale = learning_rate / static_cast<double>(corpus.size());
  for (int e = 0; e < epochs; ++e) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(params_.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      g += grad_log_prob(corpus[i], cond_of(i));
    }
    params_ += scale * g;
  }
}

Eigen::VectorXd soft_argmax(const Eigen::VectorXd& logits,
                            const Eigen::MatrixXd& embeddings, double beta) {
  if (!(beta > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "soft_argmax: beta must be > 0");
  }
  if (embeddings.rows() != logits.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "soft_argmax: vocabulary and embedding rows differ");
  }
  if (!logits.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "soft_argmax: non-finite logit");
  }
  return embeddings.transpose() * softmax(logits / beta);
}

Eigen::VectorXd soft_argmax(const Eigen::VectorXd& logits,
                            const EmbeddingTable& table, double beta) {
  Sentence vocab;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    vocab.push_back(token_name(static_cast<int>(i)));
  }
  return soft_argmax(logits, table.resolve(vocab), beta);
}

}  // namespace nwsil::rl
