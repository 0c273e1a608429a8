#ifndef NWSIL_EMBEDDINGS_H_
#define NWSIL_EMBEDDINGS_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace nwsil {

using Sentence = std::vector<std::string>;

// Synthesized padding token. Costs 1.0 against any real token, 0.0 against
// itself, and never appears in a loaded table.
inline constexpr std::string_view kPadToken = "<PAD>";

enum class OovPolicy { kStrict, kHashFallback };

inline constexpr std::uint64_t kDefaultOovHashSeed = 0x9e3779b97f4a7c15ULL;

// Receives non-fatal load diagnostics (duplicate tokens, row-count drift).
using WarningSink = std::function<void(const std::string&)>;

// Immutable token -> vector map. Safe to share across threads after load.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim,
                          OovPolicy oov_policy = OovPolicy::kStrict,
                          std::uint64_t oov_seed = kDefaultOovHashSeed);

  // Text layout: header "V d", then V lines "token x_1 ... x_d".
  static EmbeddingTable load(const std::filesystem::path& path,
                             OovPolicy oov_policy = OovPolicy::kStrict,
                             const WarningSink& warn = {});
  static EmbeddingTable parse(std::istream& in,
                              OovPolicy oov_policy = OovPolicy::kStrict,
                              const WarningSink& warn = {});

  // Replaces an existing entry. Throws on arity mismatch, zero vector or the
  // reserved pad token.
  void insert(const std::string& token, std::span<const double> values);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  OovPolicy oov_policy() const { return oov_policy_; }
  bool contains(std::string_view token) const;

  // Embedding of one token; OOV handling follows the table's policy.
  Eigen::VectorXd lookup(std::string_view token) const;

  // Row t is the embedding of tokens[t].
  Eigen::MatrixXd resolve(std::span<const std::string> tokens) const;

 private:
  Eigen::VectorXd hashed_vector(std::string_view token) const;

  std::size_t dim_;
  OovPolicy oov_policy_;
  std::uint64_t oov_seed_;
  std::unordered_map<std::string, Eigen::VectorXd> entries_;
};

// 1 - cos(za, zb), clamped to [0, 2]. Throws DegenerateVector on zero norm.
double cosine_cost(const Eigen::Ref<const Eigen::VectorXd>& za,
                   const Eigen::Ref<const Eigen::VectorXd>& zb);

struct CostMatrix {
  Eigen::MatrixXd values;
  // true where at least one side of the cell is a pad token.
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> pad_mask;
  Sentence hyp;  // after padding
  Sentence ref;  // after padding

  Eigen::Index size() const { return values.rows(); }
};

// Right-pads the shorter sequence with kPadToken, giving an L x L matrix with
// L = max(|hyp|, |ref|).
CostMatrix build_cost_matrix(const EmbeddingTable& table,
                             std::span<const std::string> hyp,
                             std::span<const std::string> ref);

// Splits on ASCII whitespace, optionally lowercasing ASCII letters.
Sentence tokenize(std::string_view line, bool lowercase = false);

}  // namespace nwsil

#endif  // NWSIL_EMBEDDINGS_H_
