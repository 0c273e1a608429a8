#include "rl/replay_buffer.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.h"

namespace nwsil::rl {

namespace {

// Best first; among equal scores the newer entry ranks higher so the oldest
// sits at the back and is evicted first.
bool ranks_before(const BufferEntry& a, const BufferEntry& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.insert_step != b.insert_step) return a.insert_step > b.insert_step;
  return a.tokens < b.tokens;
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity_per_condition, bool dedupe)
    : capacity_(capacity_per_condition), dedupe_(dedupe) {
  if (capacity_ == 0) {
    throw Error(ErrorCode::kInvalidArgument, "buffer capacity must be >= 1");
  }
}

bool ReplayBuffer::offer(BufferEntry entry) {
  if (!std::isfinite(entry.reward) || !std::isfinite(entry.score)) {
    throw Error(ErrorCode::kInvalidArgument,
                "buffer entries need finite reward and score");
  }
  auto& list = by_condition_[entry.condition];
  if (dedupe_) {
    for (const auto& e : list) {
      if (e.tokens == entry.tokens) return false;
    }
  }
  if (list.size() >= capacity_) {
    if (!(entry.score > list.back().score)) return false;
    list.pop_back();
  }
  auto pos = std::upper_bound(list.begin(), list.end(), entry, ranks_before);
  list.insert(pos, std::move(entry));
  return true;
}

const std::vector<BufferEntry>& ReplayBuffer::entries(int condition) const {
  static const std::vector<BufferEntry> kEmpty;
  auto it = by_condition_.find(condition);
  return it == by_condition_.end() ? kEmpty : it->second;
}

std::size_t ReplayBuffer::total_size() const {
  std::size_t n = 0;
  for (const auto& [c, list] : by_condition_) n += list.size();
  return n;
}

double ReplayBuffer::min_score(int condition) const {
  const auto& list = entries(condition);
  return list.empty() ? std::numeric_limits<double>::quiet_NaN()
                      : list.back().score;
}

double ReplayBuffer::max_score(int condition) const {
  const auto& list = entries(condition);
  return list.empty() ? std::numeric_limits<double>::quiet_NaN()
                      : list.front().score;
}

std::vector<BufferEntry> ReplayBuffer::sample(int condition, std::size_t k,
                                              Rng& rng) const {
  const auto& list = entries(condition);
  if (list.size() <= k) return list;
  auto idx = rng.sample_without_replacement(list.size(), k);
  std::sort(idx.begin(), idx.end());
  std::vector<BufferEntry> out;
  out.reserve(k);
  for (auto i : idx) out.push_back(list[i]);
  return out;
}

}  // namespace nwsil::rl
