#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "error.h"
#include "helpers.h"
#include "nested.h"
#include "seq_match.h"

using namespace nwsil;

namespace {

std::vector<Sentence> random_set(std::size_t k, std::size_t vocab, Rng& rng) {
  std::vector<Sentence> out;
  for (std::size_t i = 0; i < k; ++i) {
    out.push_back(testing::random_sentence(vocab, 1 + rng.below(6), rng));
  }
  return out;
}

}  // namespace

TEST_CASE("nested: orthogonal example") {
  const auto t = testing::orthogonal_table({"a", "b", "c"});
  const std::vector<Sentence> a{{"a"}, {"b"}}, b{{"a"}, {"c"}};
  const auto r = nested_wasserstein(t, a, b);
  CHECK(std::abs(r.distance - 0.5) <= 2e-3);
  CHECK(std::abs(nested_reward(r, 0) - 0.5) <= 2e-3);
  CHECK(std::abs(nested_reward(r, 1)) <= 2e-3);
  CHECK(std::abs(nested_reward(r, 0, RewardScale::kNormalized) - 1.0) <= 4e-3);
}

TEST_CASE("nested: single pair degenerates to seq_wasserstein") {
  Rng rng(12);
  const auto t = testing::random_table(10, 5, rng);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<Sentence> a{testing::random_sentence(10, 1 + rng.below(8), rng)};
    const std::vector<Sentence> b{testing::random_sentence(10, 1 + rng.below(8), rng)};
    const auto r = nested_wasserstein(t, a, b);
    CHECK(std::abs(r.distance - seq_wasserstein(t, a[0], b[0]).distance) <= 1e-6);
  }
  const std::vector<Sentence> same{{"w1", "w2"}};
  CHECK(std::abs(nested_reward(nested_wasserstein(t, same, same), 0) - 1.0) <= 1e-3);
}

TEST_CASE("nested: identical sets") {
  Rng rng(13);
  const auto t = testing::random_table(10, 5, rng);
  std::vector<Sentence> a{{"w1", "w2"}, {"w3", "w4", "w5"}};
  const auto r = nested_wasserstein(t, a, a);
  CHECK(std::abs(r.distance) <= 1e-3);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(std::abs(nested_reward(r, i) - 0.5) <= 1e-3);
  }
}

TEST_CASE("nested: result invariants, oracle agreement, symmetry") {
  Rng rng(14);
  const auto t = testing::random_table(12, 6, rng);
  const double tol = IpotConfig{}.feasibility_tol;
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t k = 1 + rng.below(5);
    const std::size_t kp = 1 + rng.below(5);
    const auto a = random_set(k, 12, rng);
    const auto b = random_set(kp, 12, rng);
    const auto r = nested_wasserstein(t, a, b);
    const auto& p = r.outer_plan.values;
    CHECK(std::abs(r.distance - p.cwiseProduct(r.seq_cost).sum()) <= 1e-12);
    for (std::size_t i = 0; i < k; ++i) {
      const double expect = p.row(i).dot(r.seq_reward.row(i));
      CHECK(std::abs(r.per_hyp_reward(i) - expect) <= 1e-12);
      CHECK(std::abs(p.row(i).sum() - 1.0 / k) <= tol);
      CHECK(std::abs(r.per_hyp_reward(i)) <= 1.0 / k + tol);
    }
    for (std::size_t j = 0; j < kp; ++j) CHECK(std::abs(p.col(j).sum() - 1.0 / kp) <= tol);

    const auto rev = nested_wasserstein(t, b, a);
    CHECK(std::abs(rev.distance - r.distance) <= 2e-3);
    CHECK(nested_wasserstein(t, a, a).distance <= 2e-3);
    if (k == kp) {
      CHECK(std::abs(r.distance - exact_ot_oracle(r.seq_cost).cost) <= 1e-3);
    }
  }
}

TEST_CASE("nested: errors") {
  const auto t = testing::orthogonal_table({"a", "b"});
  const std::vector<Sentence> a{{"a"}}, bad{{"a"}, {"zz"}}, empty;
  try {
    nested_wasserstein(t, a, bad);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnknownToken);
    CHECK(std::string(e.what()).find("(0, 1)") != std::string::npos);
  }
  CHECK_THROWS_AS(nested_wasserstein(t, empty, a), Error);
  CHECK_THROWS_AS(nested_wasserstein(t, a, empty), Error);
  const auto r = nested_wasserstein(t, a, a);
  try {
    nested_reward(r, 1);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIndexOutOfRange);
  }
}
