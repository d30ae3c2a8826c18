#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "asvlab/batch.hpp"
#include "asvlab/checkpoint.hpp"
#include "asvlab/policy.hpp"

namespace asv {

struct TrainOptions {
  AgentVariant variant;
  std::filesystem::path out_dir;
  int workers = 1;
  std::ostream* progress = nullptr;  // human-readable lines, optional
  int progress_every = 20;           // iterations
};

struct TrainResult {
  std::filesystem::path final_checkpoint;
  int iterations_run = 0;
  bool numerics_halt = false;

  // Per-iteration history (also written to train_log.csv). Episode returns
  // are NaN on iterations where no episode finished.
  std::vector<double> mean_step_reward;
  std::vector<double> mean_episode_return;
  std::vector<double> success_rate;  // trailing window of episodes
  std::vector<double> entropy;
};

/// Full PPO training run: rollouts on the batch env, GAE, clipped updates,
/// CSV log + periodic checkpoints in out_dir. Deterministic for a given
/// (config, variant, master seed); the worker count changes nothing but
/// wall time. A non-finite loss stops training and rolls the parameters
/// back to the start of that iteration.
TrainResult train_agent(const RunConfig& cfg, const TrainOptions& opt);

}  // namespace asv
