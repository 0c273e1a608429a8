#ifndef NWSIL_TESTS_HELPERS_H_
#define NWSIL_TESTS_HELPERS_H_

#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "embeddings.h"
#include "rng.h"

namespace nwsil::testing {

inline EmbeddingTable make_table(
    std::size_t dim,
    std::initializer_list<std::pair<std::string, std::vector<double>>> rows) {
  EmbeddingTable t(dim);
  for (const auto& [tok, v] : rows) t.insert(tok, v);
  return t;
}

// One-hot rows for the given tokens.
inline EmbeddingTable orthogonal_table(const std::vector<std::string>& tokens) {
  EmbeddingTable t(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::vector<double> v(tokens.size(), 0.0);
    v[i] = 1.0;
    t.insert(tokens[i], v);
  }
  return t;
}

// Random table with tokens "w0".."w<n-1>", entries uniform in [-1, 1).
inline EmbeddingTable random_table(std::size_t n, std::size_t dim, Rng& rng) {
  EmbeddingTable t(dim);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    for (auto& x : v) x = 2.0 * rng.uniform() - 1.0;
    t.insert("w" + std::to_string(i), v);
  }
  return t;
}

inline Sentence random_sentence(std::size_t vocab, std::size_t len, Rng& rng) {
  Sentence s;
  for (std::size_t i = 0; i < len; ++i) s.push_back("w" + std::to_string(rng.below(vocab)));
  return s;
}

inline Eigen::MatrixXd random_cost(int n, int m, double hi, Rng& rng) {
  Eigen::MatrixXd c(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) c(i, j) = hi * rng.uniform();
  return c;
}

}  // namespace nwsil::testing

#endif  // NWSIL_TESTS_HELPERS_H_
