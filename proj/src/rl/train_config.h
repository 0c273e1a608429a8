#ifndef NWSIL_RL_TRAIN_CONFIG_H_
#define NWSIL_RL_TRAIN_CONFIG_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kv_config.h"
#include "rl/env.h"
#include "rl/gradients.h"
#include "rl/train.h"

namespace nwsil::rl {

// Everything a training run needs, read from one key = value file.
struct TrainSetup {
  EnvSpec env;
  PolicySpec policy;
  SilConfig sil;
  TrainOptions options;
  // Non-empty: run a paired variant-vs-REINFORCE experiment over these seeds.
  std::vector<std::uint64_t> paired_seeds;
  // Every effective setting, defaults included, as strings.
  std::map<std::string, std::string> resolved;
};

// Throws Error(kConfig) naming the offending key; unknown keys are errors.
TrainSetup load_train_setup(const KvConfig& cfg);

}  // namespace nwsil::rl

#endif  // NWSIL_RL_TRAIN_CONFIG_H_
