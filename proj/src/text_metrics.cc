#include "text_metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "error.h"
#include "rng.h"

namespace nwsil {

namespace {

using NgramCounts = std::unordered_map<std::string, std::size_t>;

void check_order(int order) {
  if (order < kMinBleuOrder || order > kMaxBleuOrder) {
    throw Error(ErrorCode::kInvalidArgument,
                "BLEU order must be in [" + std::to_string(kMinBleuOrder) +
                    ", " + std::to_string(kMaxBleuOrder) + "], got " +
                    std::to_string(order));
  }
}

std::string ngram_key(const Sentence& s, std::size_t start, std::size_t n) {
  std::string key;
  for (std::size_t k = 0; k < n; ++k) {
    if (k) key.push_back('\x1f');
    key += s[start + k];
  }
  return key;
}

// counts[n-1] holds n-gram counts of the sentence.
std::vector<NgramCounts> count_ngrams(const Sentence& s, int order) {
  std::vector<NgramCounts> counts(static_cast<std::size_t>(order));
  for (std::size_t n = 1; n <= static_cast<std::size_t>(order); ++n) {
    if (s.size() < n) break;
    for (std::size_t i = 0; i + n <= s.size(); ++i) {
      ++counts[n - 1][ngram_key(s, i, n)];
    }
  }
  return counts;
}

// Closest reference length to `len`; ties go to the shorter reference.
std::size_t closest_length(const std::map<std::size_t, std::size_t>& lengths,
                           std::size_t len) {
  auto hi = lengths.lower_bound(len);
  if (hi != lengths.end() && hi->first == len) return len;
  if (hi == lengths.begin()) return hi->first;
  auto lo = std::prev(hi);
  if (hi == lengths.end()) return lo->first;
  return (len - lo->first <= hi->first - len) ? lo->first : hi->first;
}

// Max count of each n-gram over a reference set.
struct ReferenceSet {
  std::vector<NgramCounts> max_counts;
  std::map<std::size_t, std::size_t> lengths;  // length -> multiplicity

  ReferenceSet(std::span<const Sentence> refs, int order)
      : max_counts(static_cast<std::size_t>(order)) {
    for (const auto& r : refs) {
      ++lengths[r.size()];
      auto c = count_ngrams(r, order);
      for (std::size_t n = 0; n < c.size(); ++n) {
        for (const auto& [g, cnt] : c[n]) {
          auto& slot = max_counts[n][g];
          slot = std::max(slot, cnt);
        }
      }
    }
  }

  BleuStats stats(const Sentence& hyp, int order) const {
    BleuStats st;
    st.hyp_length = hyp.size();
    st.ref_length = closest_length(lengths, hyp.size());
    auto c = count_ngrams(hyp, order);
    for (std::size_t n = 0; n < c.size(); ++n) {
      for (const auto& [g, cnt] : c[n]) {
        st.totals[n] += cnt;
        auto it = max_counts[n].find(g);
        if (it != max_counts[n].end()) st.matches[n] += std::min(cnt, it->second);
      }
    }
    return st;
  }
};

}  // namespace

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  for (std::size_t n = 0; n < matches.size(); ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  hyp_length += other.hyp_length;
  ref_length += other.ref_length;
  return *this;
}

double BleuStats::score(int order) const {
  check_order(order);
  if (hyp_length == 0) return 0.0;
  double log_precision = 0.0;
  for (std::size_t n = 0; n < static_cast<std::size_t>(order); ++n) {
    if (totals[n] == 0 || matches[n] == 0) return 0.0;
    log_precision += std::log(static_cast<double>(matches[n]) /
                              static_cast<double>(totals[n]));
  }
  double brevity = 1.0;
  if (hyp_length < ref_length) {
    brevity = std::exp(1.0 - static_cast<double>(ref_length) /
                                 static_cast<double>(hyp_length));
  }
  return brevity * std::exp(log_precision / order);
}

double corpus_bleu(std::span<const Sentence> hyps,
                   std::span<const Sentence> refs, int order) {
  check_order(order);
  if (hyps.empty() || refs.empty()) {
    throw Error(ErrorCode::kEmptyCorpus,
                "corpus_bleu needs nonempty hypothesis and reference corpora");
  }
  const ReferenceSet ref_set(refs, order);
  BleuStats total;
  for (const auto& h : hyps) total += ref_set.stats(h, order);
  return total.score(order);
}

double sentence_bleu(const Sentence& hyp, std::span<const Sentence> refs,
                     int order) {
  return corpus_bleu(std::span<const Sentence>(&hyp, 1), refs, order);
}

double self_bleu(std::span<const Sentence> hyps, int order, std::size_t cap,
                 std::uint64_t seed) {
  check_order(order);
  if (hyps.size() < 2) {
    throw Error(ErrorCode::kTooFewSentences,
                "self_bleu needs at least 2 sentences, got " +
                    std::to_string(hyps.size()));
  }
  const std::size_t n_sent = hyps.size();

  // Top-two counts per n-gram with the owner of the top one, so the
  // leave-one-out maximum is available without rescanning the corpus.
  struct TopTwo {
    std::size_t best = 0;
    std::size_t second = 0;
    std::size_t owner = 0;
  };
  std::vector<std::vector<NgramCounts>> counts;
  counts.reserve(n_sent);
  std::vector<std::unordered_map<std::string, TopTwo>> top(
      static_cast<std::size_t>(order));
  std::map<std::size_t, std::size_t> lengths;
  for (std::size_t j = 0; j < n_sent; ++j) {
    counts.push_back(count_ngrams(hyps[j], order));
    ++lengths[hyps[j].size()];
    for (std::size_t n = 0; n < counts[j].size(); ++n) {
      for (const auto& [g, c] : counts[j][n]) {
        auto& t = top[n][g];
        if (c > t.best) {
          t.second = t.best;
          t.best = c;
          t.owner = j;
        } else if (c > t.second) {
          t.second = c;
        }
      }
    }
  }

  std::vector<std::size_t> scored;
  if (n_sent > cap) {
    Rng rng(seed);
    scored = rng.sample_without_replacement(n_sent, cap);
    std::sort(scored.begin(), scored.end());
  } else {
    scored.resize(n_sent);
    for (std::size_t i = 0; i < n_sent; ++i) scored[i] = i;
  }

  double sum = 0.0;
  for (std::size_t i : scored) {
    const Sentence& h = hyps[i];
    BleuStats st;
    st.hyp_length = h.size();
    if (--lengths[h.size()] == 0) lengths.erase(h.size());
    st.ref_length = closest_length(lengths, h.size());
    ++lengths[h.size()];
    for (std::size_t n = 0; n < counts[i].size(); ++n) {
      for (const auto& [g, c] : counts[i][n]) {
        st.totals[n] += c;
        const TopTwo& t = top[n].at(g);
        const std::size_t others = (t.owner == i) ? t.second : t.best;
        st.matches[n] += std::min(c, others);
      }
    }
    sum += st.score(order);
  }
  return sum / static_cast<double>(scored.size());
}

double f1_bleu(double test_bleu, double self_bleu) {
  const double diversity = 1.0 - self_bleu;
  const double denom = test_bleu + diversity;
  if (denom <= 0.0) return 0.0;
  return 2.0 * test_bleu * diversity / denom;
}

BleuReport bleu_report(std::span<const Sentence> hyps,
                       std::span<const Sentence> refs, int order) {
  BleuReport r;
  r.order = order;
  r.test_bleu = corpus_bleu(hyps, refs, order);
  r.self_bleu = self_bleu(hyps, order);
  r.f1_bleu = f1_bleu(r.test_bleu, r.self_bleu);
  return r;
}

double naive_semantic_score(const EmbeddingTable& table, const Sentence& hyp,
                            const Sentence& ref) {
  const Eigen::VectorXd mean_h = table.resolve(hyp).colwise().mean();
  const Eigen::VectorXd mean_r = table.resolve(ref).colwise().mean();
  return 1.0 - cosine_cost(mean_h, mean_r);
}

}  // namespace nwsil
