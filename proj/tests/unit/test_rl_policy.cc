#include <cmath>
#include <vector>

#include <doctest.h>

#include "error.h"
#include "helpers.h"
#include "rl/env.h"
#include "rl/gradients.h"
#include "rl/policy.h"

using namespace nwsil;
using namespace nwsil::rl;

namespace {

void randomize(Policy& p, Rng& rng, double scale = 1.0) {
  for (Eigen::Index i = 0; i < p.num_params(); ++i)
    p.params()[i] = scale * (2.0 * rng.uniform() - 1.0);
}

TokenSeq random_tokens(int vocab, int len, Rng& rng) {
  TokenSeq t;
  for (int i = 0; i < len; ++i) t.push_back(static_cast<int>(rng.below(vocab)));
  return t;
}

// Every sequence of length T over V tokens.
std::vector<TokenSeq> all_sequences(int vocab, int horizon) {
  std::vector<TokenSeq> out{{}};
  for (int t = 0; t < horizon; ++t) {
    std::vector<TokenSeq> next;
    for (const auto& s : out)
      for (int v = 0; v < vocab; ++v) {
        auto e = s;
        e.push_back(v);
        next.push_back(e);
      }
    out = std::move(next);
  }
  return out;
}

EnvSpec small_env(int vocab, int horizon) {
  EnvSpec s;
  s.vocab_size = vocab;
  s.horizon = horizon;
  return s;
}

}  // namespace

TEST_CASE("policy: grad_log_prob matches central differences") {
  Rng rng(101);
  for (auto kind : {PolicyKind::kTabular, PolicyKind::kLinear}) {
    for (double temp : {1.0, 0.7}) {
      Policy p(kind, 4, 3, 2, temp);
      randomize(p, rng);
      const TokenSeq y = random_tokens(4, 3, rng);
      const int cond = 1;
      const Eigen::VectorXd g = p.grad_log_prob(y, cond);
      Eigen::VectorXd fd(p.num_params());
      const double h = 1e-6;
      for (Eigen::Index i = 0; i < p.num_params(); ++i) {
        const double keep = p.params()[i];
        p.params()[i] = keep + h;
        const double up = p.log_prob(y, cond);
        p.params()[i] = keep - h;
        const double down = p.log_prob(y, cond);
        p.params()[i] = keep;
        fd[i] = (up - down) / (2 * h);
      }
      CHECK((g - fd).norm() / std::max(1.0, fd.norm()) < 1e-5);
    }
  }
}

TEST_CASE("policy: probabilities are valid and step log-probs sum to log_prob") {
  Rng rng(102);
  for (auto kind : {PolicyKind::kTabular, PolicyKind::kLinear}) {
    Policy p(kind, 5, 4, 1, 0.8);
    randomize(p, rng, 3.0);
    for (int pos = 0; pos < 4; ++pos) {
      for (int prev = (pos == 0 ? -1 : 0); prev < (pos == 0 ? 0 : 5); ++prev) {
        const auto pr = p.probs(0, pos, prev);
        CHECK(pr.minCoeff() >= 0.0);
        CHECK(std::abs(pr.sum() - 1.0) < 1e-12);
      }
    }
    const TokenSeq y = random_tokens(5, 4, rng);
    const auto steps = p.step_log_probs(y);
    double s = 0.0;
    for (double x : steps) {
      CHECK(x <= 0.0);
      s += x;
    }
    CHECK(std::abs(s - p.log_prob(y)) < 1e-12);
  }
}

TEST_CASE("policy: sequence probabilities sum to one") {
  Rng rng(103);
  Policy p(PolicyKind::kLinear, 3, 3);
  randomize(p, rng, 2.0);
  double total = 0.0;
  for (const auto& y : all_sequences(3, 3)) total += std::exp(p.log_prob(y));
  CHECK(std::abs(total - 1.0) < 1e-12);
}

TEST_CASE("policy: score function has zero mean") {
  Rng rng(104);
  for (auto kind : {PolicyKind::kTabular, PolicyKind::kLinear}) {
    Policy p(kind, 3, 3);
    randomize(p, rng, 2.0);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(p.num_params());
    for (const auto& y : all_sequences(3, 3))
      m += std::exp(p.log_prob(y)) * p.grad_log_prob(y);
    CHECK(m.lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("policy: invalid shapes and states") {
  CHECK_THROWS_AS(Policy(PolicyKind::kTabular, 0, 3), Error);
  CHECK_THROWS_AS(Policy(PolicyKind::kTabular, 3, 0), Error);
  CHECK_THROWS_AS(Policy(PolicyKind::kTabular, 3, 3, 1, 0.0), Error);
  Policy p(PolicyKind::kTabular, 3, 2);
  CHECK_THROWS_AS(p.probs(0, 2, 0), Error);
  CHECK_THROWS_AS(p.probs(1, 0, -1), Error);
  CHECK_THROWS_AS(p.log_prob({0, 3}), Error);
}

TEST_CASE("pretrain: tabular fit reproduces smoothed counts") {
  Policy p(PolicyKind::kTabular, 2, 1);
  const std::vector<TokenSeq> corpus{{0}, {0}, {0}, {1}};
  p.pretrain(corpus, {}, 0.5);
  const auto pr = p.probs(0, 0, -1);
  CHECK(pr[0] == doctest::Approx(3.5 / 5.0).epsilon(1e-12));
  CHECK(pr[1] == doctest::Approx(1.5 / 5.0).epsilon(1e-12));
}

TEST_CASE("pretrain: linear fit raises corpus likelihood") {
  Policy p(PolicyKind::kLinear, 3, 3);
  const std::vector<TokenSeq> corpus{{0, 1, 2}, {0, 1, 2}, {1, 1, 0}};
  double before = 0.0;
  for (const auto& y : corpus) before += p.log_prob(y);
  p.pretrain(corpus, {}, 0.5, 200, 0.5);
  double after = 0.0;
  for (const auto& y : corpus) after += p.log_prob(y);
  CHECK(after > before + 1.0);
}

TEST_CASE("argmax_lowest and softmax") {
  Eigen::VectorXd v(4);
  v << 1.0, 3.0, 3.0, 2.0;
  CHECK(argmax_lowest(v) == 1);
  v << 0.0, 0.0, 0.0, 0.0;
  CHECK(argmax_lowest(v) == 0);
  Eigen::VectorXd big(2);
  big << 1000.0, 1000.0;
  const auto s = softmax(big);
  CHECK(s[0] == doctest::Approx(0.5));
  CHECK(std::isfinite(s[1]));
}

TEST_CASE("soft_argmax: examples") {
  Eigen::MatrixXd e(2, 2);
  e << 1, 0, 0, 1;
  Eigen::VectorXd logits(2);
  logits << 0.0, 0.0;
  auto m = soft_argmax(logits, e, 1.0);
  CHECK(m[0] == doctest::Approx(0.5));
  CHECK(m[1] == doctest::Approx(0.5));
  logits << 10.0, -10.0;
  m = soft_argmax(logits, e, 0.01);
  CHECK(m[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m[1] == doctest::Approx(0.0).epsilon(1e-12));
  const auto t = testing::orthogonal_table({"t0", "t1"});
  const auto mt = soft_argmax(logits, t, 0.01);
  CHECK(mt[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(soft_argmax(logits, e, 0.0), Error);
}

TEST_CASE("sampling: near-deterministic policy returns the mode") {
  ToyEnv env(small_env(3, 4));
  Policy p(PolicyKind::kTabular, 3, 4);
  // Tabular params are one logit row per state; push every row toward token 2.
  for (Eigen::Index i = 0; i < p.num_params(); ++i) p.params()[i] = (i % 3 == 2) ? 50.0 : -50.0;
  const auto trajs = sample_trajectories(p, env, 50, 7);
  for (const auto& t : trajs) CHECK(t.tokens == TokenSeq{2, 2, 2, 2});
}

TEST_CASE("sampling: uniform V=2 T=2 frequencies") {
  ToyEnv env(small_env(2, 2));
  Policy p(PolicyKind::kTabular, 2, 2);
  const int n = 100000;
  const auto trajs = sample_trajectories(p, env, n, 11);
  int hits = 0;
  for (const auto& t : trajs) {
    CHECK(t.tokens.size() == 2);
    for (double lp : t.step_logprobs) CHECK(lp <= 0.0);
    hits += t.tokens == TokenSeq{1, 0};
  }
  const double sigma = std::sqrt(n * 0.25 * 0.75);
  CHECK(std::abs(hits - n * 0.25) < 3 * sigma);
}

TEST_CASE("sampling: seed determinism") {
  ToyEnv env(small_env(4, 5));
  Rng rng(3);
  Policy p(PolicyKind::kLinear, 4, 5);
  randomize(p, rng);
  const auto a = sample_trajectories(p, env, 20, 42);
  const auto b = sample_trajectories(p, env, 20, 42);
  const auto c = sample_trajectories(p, env, 20, 43);
  bool differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].tokens == b[i].tokens);
    CHECK(a[i].reward == b[i].reward);
    differ = differ || a[i].tokens != c[i].tokens;
  }
  CHECK(differ);
}

TEST_CASE("greedy_decode: ties go to the lowest token") {
  ToyEnv env(small_env(3, 2));
  Policy p(PolicyKind::kTabular, 3, 2);
  CHECK(greedy_decode(p, env).tokens == TokenSeq{0, 0});
}

TEST_CASE("reinforce_grad: rewards equal to the baseline give zero") {
  ToyEnv env(small_env(3, 3));
  Rng rng(5);
  Policy p(PolicyKind::kLinear, 3, 3);
  randomize(p, rng);
  auto trajs = sample_trajectories(p, env, 8, rng);
  for (auto& t : trajs) t.reward = 0.25;
  CHECK(reinforce_grad(trajs, p, 0.25).isZero(0.0));
}

TEST_CASE("reinforce_grad: Monte-Carlo estimate agrees with enumeration") {
  ToyEnv env(small_env(2, 3));
  Rng rng(6);
  Policy p(PolicyKind::kTabular, 2, 3);
  randomize(p, rng);
  Eigen::VectorXd exact = Eigen::VectorXd::Zero(p.num_params());
  for (const auto& y : all_sequences(2, 3))
    exact += std::exp(p.log_prob(y)) * env.reward(y) * p.grad_log_prob(y);

  const int n = 20000;
  const auto trajs = sample_trajectories(p, env, n, rng);
  const Eigen::VectorXd mc = reinforce_grad(trajs, p, 0.0);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(p.num_params());
  for (const auto& t : trajs) {
    const Eigen::VectorXd g = t.reward * p.grad_log_prob(t.tokens);
    sq += (g - mc).cwiseAbs2();
  }
  const Eigen::VectorXd se = (sq / (n - 1.0)).cwiseSqrt() / std::sqrt(double(n));
  for (Eigen::Index i = 0; i < p.num_params(); ++i) {
    CHECK(std::abs(mc[i] - exact[i]) <= 3.0 * se[i] + 1e-12);
  }
}

TEST_CASE("reinforce_grad: baseline does not change the exact expectation") {
  ToyEnv env(small_env(2, 3));
  Rng rng(7);
  Policy p(PolicyKind::kLinear, 2, 3);
  randomize(p, rng);
  auto expect = [&](double b) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(p.num_params());
    for (const auto& y : all_sequences(2, 3)) {
      Trajectory t;
      t.tokens = y;
      t.reward = env.reward(y);
      const std::vector<Trajectory> one{t};
      g += std::exp(p.log_prob(y)) * reinforce_grad(one, p, b);
    }
    return g;
  };
  CHECK((expect(0.0) - expect(-1.3)).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("reinforce_grad: errors") {
  Policy p(PolicyKind::kTabular, 2, 2);
  const std::vector<Trajectory> none;
  CHECK_THROWS_AS(reinforce_grad(none, p, 0.0), Error);
  std::vector<Trajectory> two(2);
  two[0].tokens = two[1].tokens = {0, 1};
  const std::vector<double> b{0.0};
  CHECK_THROWS_AS(reinforce_grad(two, p, b), Error);
}
