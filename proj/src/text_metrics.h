#ifndef NWSIL_TEXT_METRICS_H_
#define NWSIL_TEXT_METRICS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "embeddings.h"

namespace nwsil {

inline constexpr int kMinBleuOrder = 2;
inline constexpr int kMaxBleuOrder = 5;
inline constexpr std::size_t kSelfBleuCap = 1000;
inline constexpr std::uint64_t kSelfBleuSeed = 1234;

// Clipped n-gram matches and candidate n-gram totals, per order, plus the
// lengths entering the brevity penalty.
struct BleuStats {
  std::array<std::size_t, kMaxBleuOrder> matches{};
  std::array<std::size_t, kMaxBleuOrder> totals{};
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;

  BleuStats& operator+=(const BleuStats& other);
  // Geometric mean of raw precisions times brevity penalty; no smoothing.
  double score(int order) const;
};

struct BleuReport {
  int order = 4;
  double test_bleu = 0.0;
  double self_bleu = 0.0;
  double f1_bleu = 0.0;
};

// Corpus BLEU where every hypothesis is scored against the whole reference
// corpus (multi-reference clipping, closest reference length).
double corpus_bleu(std::span<const Sentence> hyps,
                   std::span<const Sentence> refs, int order);

// BLEU of a single hypothesis against a reference set.
double sentence_bleu(const Sentence& hyp, std::span<const Sentence> refs,
                     int order);

// Mean leave-one-out BLEU. Corpora above `cap` score a seeded uniform
// subsample of `cap` sentences (each still against all others).
double self_bleu(std::span<const Sentence> hyps, int order,
                 std::size_t cap = kSelfBleuCap,
                 std::uint64_t seed = kSelfBleuSeed);

// 2 a (1 - s) / (a + 1 - s); 0 when the denominator is 0.
double f1_bleu(double test_bleu, double self_bleu);

BleuReport bleu_report(std::span<const Sentence> hyps,
                       std::span<const Sentence> refs, int order);

// Cosine similarity of the unweighted mean embeddings.
double naive_semantic_score(const EmbeddingTable& table, const Sentence& hyp,
                            const Sentence& ref);

}  // namespace nwsil

#endif  // NWSIL_TEXT_METRICS_H_
