#ifndef NWSIL_RL_REPLAY_BUFFER_H_
#define NWSIL_RL_REPLAY_BUFFER_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "rl/env.h"
#include "rng.h"

namespace nwsil::rl {

struct BufferEntry {
  int condition = 0;
  TokenSeq tokens;
  double reward = 0.0;  // environment reward, used by the self-imitation gate
  double score = 0.0;   // selection criterion value, orders the buffer
  std::int64_t insert_step = 0;
};

// Keeps the best `capacity` entries per condition by score. When full, a new
// entry is admitted only if it scores strictly above the current minimum,
// which is then evicted (oldest first among equal scores).
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity_per_condition, bool dedupe = true);

  std::size_t capacity() const { return capacity_; }
  bool dedupe() const { return dedupe_; }

  // True if the entry was stored.
  bool offer(BufferEntry entry);

  // Entries of a condition, best score first.
  const std::vector<BufferEntry>& entries(int condition) const;
  std::size_t size(int condition) const { return entries(condition).size(); }
  std::size_t total_size() const;
  bool full(int condition) const { return size(condition) >= capacity_; }

  double min_score(int condition) const;
  double max_score(int condition) const;

  // All entries when at most k are held, otherwise k drawn uniformly without
  // replacement; returned best score first.
  std::vector<BufferEntry> sample(int condition, std::size_t k,
                                  Rng& rng) const;

 private:
  std::size_t capacity_;
  bool dedupe_;
  std::map<int, std::vector<BufferEntry>> by_condition_;
};

}  // namespace nwsil::rl

#endif  // NWSIL_RL_REPLAY_BUFFER_H_
