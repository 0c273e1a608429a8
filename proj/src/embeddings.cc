#include "embeddings.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "error.h"

namespace nwsil {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view field, T& out) {
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

bool all_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::size_t dim, OovPolicy oov_policy,
                               std::uint64_t oov_seed)
    : dim_(dim), oov_policy_(oov_policy), oov_seed_(oov_seed) {
  if (dim == 0) {
    throw Error(ErrorCode::kInvalidArgument, "embedding dimension must be > 0");
  }
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path,
                                    OovPolicy oov_policy,
                                    const WarningSink& warn) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open embeddings file '" +
                                    path.string() + "'");
  }
  return parse(in, oov_policy, warn);
}

EmbeddingTable EmbeddingTable::parse(std::istream& in, OovPolicy oov_policy,
                                     const WarningSink& warn) {
  auto emit = [&](const std::string& msg) {
    if (warn) {
      warn(msg);
    } else {
      std::clog << "warning: " << msg << '\n';
    }
  };

  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kMalformedHeader,
                "line 1: missing header \"V d\"", 1);
  }
  auto header = split_fields(line);
  std::size_t vocab = 0;
  std::size_t dim = 0;
  if (header.size() != 2 || !parse_number(header[0], vocab) ||
      !parse_number(header[1], dim) || dim == 0) {
    throw Error(ErrorCode::kMalformedHeader,
                "line 1: header must be two integers \"V d\" with d > 0", 1);
  }

  EmbeddingTable table(dim, oov_policy);
  std::vector<double> values(dim);
  std::size_t line_no = 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_fields(line);
    if (fields.empty()) continue;
    const std::size_t got = fields.size() - 1;
    if (got != dim) {
      throw Error(ErrorCode::kArityMismatch,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(dim) + " values, got " +
                      std::to_string(got),
                  line_no);
    }
    for (std::size_t k = 0; k < dim; ++k) {
      if (!parse_number(fields[k + 1], values[k]) ||
          !std::isfinite(values[k])) {
        throw Error(ErrorCode::kArityMismatch,
                    "line " + std::to_string(line_no) + ": value " +
                        std::to_string(k + 1) + " is not a finite number",
                    line_no);
      }
    }
    const std::string token(fields[0]);
    if (token == kPadToken) {
      throw Error(ErrorCode::kReservedToken,
                  "line " + std::to_string(line_no) + ": token " +
                      std::string(kPadToken) + " is reserved",
                  line_no);
    }
    if (all_zero(values)) {
      throw Error(ErrorCode::kZeroVector,
                  "line " + std::to_string(line_no) + ": zero vector for '" +
                      token + "'",
                  line_no);
    }
    if (table.contains(token)) {
      emit("line " + std::to_string(line_no) + ": duplicate token '" + token +
           "', keeping the later vector");
    }
    table.insert(token, values);
    ++rows;
  }
  if (rows != vocab) {
    emit("header declares " + std::to_string(vocab) + " rows, found " +
         std::to_string(rows));
  }
  return table;
}

void EmbeddingTable::insert(const std::string& token,
                            std::span<const double> values) {
  if (values.size() != dim_) {
    throw Error(ErrorCode::kArityMismatch,
                "vector for '" + token + "' has " +
                    std::to_string(values.size()) + " values, expected " +
                    std::to_string(dim_));
  }
  if (token == kPadToken) {
    throw Error(ErrorCode::kReservedToken,
                "token " + std::string(kPadToken) + " is reserved");
  }
  if (all_zero(values)) {
    throw Error(ErrorCode::kZeroVector, "zero vector for '" + token + "'");
  }
  entries_[token] = Eigen::Map<const Eigen::VectorXd>(
      values.data(), static_cast<Eigen::Index>(values.size()));
}

bool EmbeddingTable::contains(std::string_view token) const {
  return entries_.find(std::string(token)) != entries_.end();
}

Eigen::VectorXd EmbeddingTable::lookup(std::string_view token) const {
  auto it = entries_.find(std::string(token));
  if (it != entries_.end()) return it->second;
  if (oov_policy_ == OovPolicy::kStrict) {
    throw Error(ErrorCode::kUnknownToken,
                "unknown token '" + std::string(token) + "'");
  }
  return hashed_vector(token);
}

Eigen::VectorXd EmbeddingTable::hashed_vector(std::string_view token) const {
  std::uint64_t state = fnv1a(token) ^ oov_seed_;
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim_));
  do {
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      const double u =
          static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
      v[k] = 2.0 * u - 1.0;
    }
  } while (v.norm() == 0.0);
  return v / v.norm();
}

Eigen::MatrixXd EmbeddingTable::resolve(
    std::span<const std::string> tokens) const {
  if (tokens.empty()) {
    throw Error(ErrorCode::kEmptyInput, "cannot resolve an empty sequence");
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(tokens.size()),
                      static_cast<Eigen::Index>(dim_));
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    out.row(static_cast<Eigen::Index>(t)) = lookup(tokens[t]).transpose();
  }
  return out;
}

double cosine_cost(const Eigen::Ref<const Eigen::VectorXd>& za,
                   const Eigen::Ref<const Eigen::VectorXd>& zb) {
  const double na = za.norm();
  const double nb = zb.norm();
  if (na == 0.0 || nb == 0.0) {
    throw Error(ErrorCode::kDegenerateVector,
                "cosine cost of a zero-norm vector is undefined");
  }
  const double cost = 1.0 - za.dot(zb) / (na * nb);
  return std::clamp(cost, 0.0, 2.0);
}

CostMatrix build_cost_matrix(const EmbeddingTable& table,
                             std::span<const std::string> hyp,
                             std::span<const std::string> ref) {
  if (hyp.empty() || ref.empty()) {
    throw Error(ErrorCode::kEmptyInput,
                "cost matrix needs two nonempty sequences");
  }
  const std::size_t len = std::max(hyp.size(), ref.size());
  CostMatrix cm;
  cm.hyp.assign(hyp.begin(), hyp.end());
  cm.ref.assign(ref.begin(), ref.end());
  cm.hyp.resize(len, std::string(kPadToken));
  cm.ref.resize(len, std::string(kPadToken));

  const Eigen::MatrixXd ea = table.resolve(hyp);
  const Eigen::MatrixXd eb = table.resolve(ref);
  const auto n = static_cast<Eigen::Index>(len);
  cm.values.resize(n, n);
  cm.pad_mask.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool pad_i = i >= ea.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
      const bool pad_j = j >= eb.rows();
      cm.pad_mask(i, j) = pad_i || pad_j;
      if (pad_i && pad_j) {
        cm.values(i, j) = 0.0;
      } else if (pad_i || pad_j) {
        cm.values(i, j) = 1.0;
      } else if (cm.hyp[static_cast<std::size_t>(i)] ==
                 cm.ref[static_cast<std::size_t>(j)]) {
        cm.values(i, j) = 0.0;
      } else {
        cm.values(i, j) =
            cosine_cost(ea.row(i).transpose(), eb.row(j).transpose());
      }
    }
  }
  return cm;
}

Sentence tokenize(std::string_view line, bool lowercase) {
  Sentence out;
  for (auto field : split_fields(line)) {
    std::string tok(field);
    if (lowercase) {
      std::transform(tok.begin(), tok.end(), tok.begin(), [](char c) {
        return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
      });
    }
    out.push_back(std::move(tok));
  }
  return out;
}

}  // namespace nwsil
