#include <sstream>

#include <doctest.h>

#include "embeddings.h"
#include "error.h"
#include "helpers.h"

using namespace nwsil;

namespace {

EmbeddingTable parse(const std::string& text,
                     OovPolicy policy = OovPolicy::kStrict,
                     std::vector<std::string>* warnings = nullptr) {
  std::istringstream in(text);
  return EmbeddingTable::parse(in, policy, [&](const std::string& w) {
    if (warnings) warnings->push_back(w);
  });
}

template <typename F>
Error capture(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an nwsil::Error");
  return Error(ErrorCode::kInternal, "unreachable");
}

}  // namespace

TEST_CASE("load: basic table") {
  const auto t = parse("2 3\na 1 0 0\nb 0 1 0\n");
  CHECK(t.dim() == 3);
  CHECK(t.size() == 2);
  CHECK(t.contains("a"));
  CHECK(!t.contains("c"));
}

TEST_CASE("load: zero vector names its line") {
  const auto e = capture([] { parse("1 2\na 0 0\n"); });
  CHECK(e.code() == ErrorCode::kZeroVector);
  REQUIRE(e.line().has_value());
  CHECK(*e.line() == 2);
}

TEST_CASE("load: arity mismatch names line and counts") {
  const auto e = capture([] { parse("1 3\na 1 0\n"); });
  CHECK(e.code() == ErrorCode::kArityMismatch);
  CHECK(*e.line() == 2);
  const std::string msg = e.what();
  CHECK(msg.find('3') != std::string::npos);
  CHECK(msg.find('2') != std::string::npos);
}

TEST_CASE("load: malformed header") {
  CHECK(capture([] { parse("x 3\n"); }).code() == ErrorCode::kMalformedHeader);
  CHECK(capture([] { parse("2\n"); }).code() == ErrorCode::kMalformedHeader);
  CHECK(capture([] { parse(""); }).code() == ErrorCode::kMalformedHeader);
  CHECK(capture([] { parse("1 0\n"); }).code() == ErrorCode::kMalformedHeader);
}

TEST_CASE("load: non-numeric component is an arity error on that line") {
  const auto e = capture([] { parse("2 2\na 1 0\nb 1 zz\n"); });
  CHECK(*e.line() == 3);
}

TEST_CASE("load: unreadable file") {
  const auto e = capture([] { EmbeddingTable::load("/nonexistent/x.vec"); });
  CHECK(e.code() == ErrorCode::kIo);
}

TEST_CASE("load: reserved pad token rejected") {
  const auto e = capture([] { parse("1 2\n<PAD> 1 0\n"); });
  CHECK(e.code() == ErrorCode::kReservedToken);
}

TEST_CASE("load: duplicate token, last wins with a warning") {
  std::vector<std::string> warnings;
  const auto t = parse("2 2\na 1 0\na 0 1\n", OovPolicy::kStrict, &warnings);
  CHECK(t.size() == 1);
  CHECK(t.lookup("a")(1) == 1.0);
  CHECK(warnings.size() == 1);
}

TEST_CASE("load: locale-independent decimals and exponents") {
  const auto t = parse("1 3\na 1.5e0 -2.25 3E-1\n");
  CHECK(t.lookup("a")(0) == 1.5);
  CHECK(t.lookup("a")(1) == -2.25);
  CHECK(t.lookup("a")(2) == doctest::Approx(0.3));
}

TEST_CASE("resolve: rows in token order") {
  const auto t = parse("2 3\na 1 0 0\nb 0 1 0\n");
  const Sentence s{"a", "b"};
  const auto m = t.resolve(s);
  Eigen::MatrixXd expected(2, 3);
  expected << 1, 0, 0, 0, 1, 0;
  CHECK(m == expected);
}

TEST_CASE("resolve: strict OOV raises UnknownToken") {
  const auto t = parse("1 2\na 1 0\n");
  const Sentence s{"z"};
  const auto e = capture([&] { t.resolve(s); });
  CHECK(e.code() == ErrorCode::kUnknownToken);
  CHECK(std::string(e.what()).find("z") != std::string::npos);
}

TEST_CASE("resolve: hash fallback is deterministic and unit norm") {
  const auto t1 = parse("1 4\na 1 0 0 0\n", OovPolicy::kHashFallback);
  const auto t2 = parse("1 4\na 1 0 0 0\n", OovPolicy::kHashFallback);
  const Sentence s{"z", "z"};
  const auto m1 = t1.resolve(s);
  const auto m2 = t2.resolve(s);
  CHECK(m1 == m2);
  CHECK(m1.row(0) == m1.row(1));
  CHECK(m1.row(0).norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t1.lookup("z") != t1.lookup("y"));
}

TEST_CASE("resolve: empty input rejected") {
  const auto t = parse("1 2\na 1 0\n");
  const Sentence s;
  CHECK(capture([&] { t.resolve(s); }).code() == ErrorCode::kEmptyInput);
}

TEST_CASE("cosine_cost: examples") {
  Eigen::Vector2d x(1, 0), y(0, 1), z(-1, 0);
  CHECK(cosine_cost(x, x) == doctest::Approx(0.0));
  CHECK(cosine_cost(x, y) == doctest::Approx(1.0));
  CHECK(cosine_cost(x, z) == doctest::Approx(2.0));
  CHECK(capture([&] { cosine_cost(x, Eigen::Vector2d::Zero()); }).code() ==
        ErrorCode::kDegenerateVector);
}

TEST_CASE("cosine_cost: symmetric and scale-invariant") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd a(5), b(5);
    for (int i = 0; i < 5; ++i) {
      a(i) = 2 * rng.uniform() - 1;
      b(i) = 2 * rng.uniform() - 1;
    }
    const double c = cosine_cost(a, b);
    CHECK(std::abs(c - cosine_cost(b, a)) <= 1e-12);
    const double alpha = 0.01 + 100 * rng.uniform();
    const double beta = 0.01 + 100 * rng.uniform();
    CHECK(std::abs(cosine_cost(alpha * a, beta * b) - c) <= 1e-9);
    CHECK(c >= 0.0);
    CHECK(c <= 2.0);
  }
}

TEST_CASE("build_cost_matrix: pad row against the toy table") {
  const auto t = testing::make_table(3, {{"a", {1, 0, 0}}, {"b", {1, 1, 0}}});
  const Sentence hyp{"a"}, ref{"a", "b"};
  const auto c = build_cost_matrix(t, hyp, ref);
  REQUIRE(c.size() == 2);
  const double cab = 1.0 - 1.0 / std::sqrt(2.0);
  CHECK(c.values(0, 0) == 0.0);
  CHECK(c.values(0, 1) == doctest::Approx(cab).epsilon(1e-12));
  CHECK(c.values(1, 0) == 1.0);
  CHECK(c.values(1, 1) == 1.0);
  CHECK(!c.pad_mask(0, 0));
  CHECK(c.pad_mask(1, 0));
  CHECK(c.hyp.size() == 2);
  CHECK(c.hyp[1] == std::string(kPadToken));
}

TEST_CASE("build_cost_matrix: identical sequences give a zero diagonal") {
  Rng rng(3);
  const auto t = testing::random_table(10, 6, rng);
  const auto s = testing::random_sentence(10, 7, rng);
  const auto c = build_cost_matrix(t, s, s);
  for (int i = 0; i < c.size(); ++i) CHECK(c.values(i, i) == 0.0);
  const Sentence one{"w1"};
  CHECK(build_cost_matrix(t, one, one).values(0, 0) == 0.0);
}

TEST_CASE("build_cost_matrix: square, transpose-consistent, pad cells exact") {
  Rng rng(5);
  const auto t = testing::random_table(12, 4, rng);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = testing::random_sentence(12, 1 + rng.below(8), rng);
    const auto b = testing::random_sentence(12, 1 + rng.below(8), rng);
    const auto ab = build_cost_matrix(t, a, b);
    const auto ba = build_cost_matrix(t, b, a);
    const auto l = static_cast<Eigen::Index>(std::max(a.size(), b.size()));
    CHECK(ab.values.rows() == l);
    CHECK(ab.values.cols() == l);
    for (Eigen::Index i = 0; i < l; ++i) {
      for (Eigen::Index j = 0; j < l; ++j) {
        const double v = ab.values(i, j);
        CHECK(v >= 0.0);
        CHECK(v <= 2.0);
        const bool pi = ab.hyp[i] == kPadToken, pj = ab.ref[j] == kPadToken;
        if (pi && pj) CHECK(v == 0.0);
        if (pi != pj) CHECK(v == 1.0);
        if (!pi && !pj) {
          CHECK(v == ba.values(j, i));
          if (ab.hyp[i] == ab.ref[j]) CHECK(v == 0.0);
        }
      }
    }
  }
}

TEST_CASE("tokenize: whitespace split and ASCII lowercasing") {
  CHECK(tokenize("  The  cat\tSAT \r\n") == Sentence{"The", "cat", "SAT"});
  CHECK(tokenize("The cat", true) == Sentence{"the", "cat"});
  CHECK(tokenize("   ").empty());
}
