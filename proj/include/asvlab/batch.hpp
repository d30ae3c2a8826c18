#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "asvlab/env.hpp"
#include "asvlab/threadpool.hpp"

namespace asv {

/// FNV-1a over raw bytes; used to fingerprint batch outputs bit-exactly.
inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

struct BatchSpec {
  WorldSpec world;
  EnvConfig env;
  RewardParams reward;
  int n_envs = 1;
  std::uint64_t master_seed = 0;
  int goal_index = -1;  // >= 0 pins every env to one grid goal
};

/// Vectorized environment: one state slot per env in contiguous arrays,
/// auto-reset on termination. Every per-env quantity lives in its own flat
/// array and every env owns a counter-derived generator, so stepping envs
/// [b, e) on any worker partition yields byte-identical results.
class BatchEnv {
 public:
  /// `pool` may be null (inline stepping); not owned.
  BatchEnv(const BatchSpec& spec, WorkerPool* pool = nullptr);

  int n_envs() const { return spec_.n_envs; }
  const BatchSpec& spec() const { return spec_; }

  /// Start episode 0 (first call) or abandon everything in flight and start
  /// fresh episodes. Fills obs().
  void reset();

  /// Step every env with actions (n_envs x 2). Terminated envs reset
  /// immediately; their rows in obs() describe the fresh episode while
  /// final_obs() keeps the pre-reset observation for bootstrapping.
  void step(const Eigen::Ref<const Eigen::MatrixX2d>& actions);

  /// Integrator-only stepping (no reward, no reset); throughput baseline.
  void step_physics(const Eigen::Ref<const Eigen::MatrixX2d>& actions);

  const Eigen::MatrixXd& obs() const { return obs_; }
  const Eigen::MatrixXd& final_obs() const { return final_obs_; }
  const Eigen::VectorXd& rewards() const { return rewards_; }
  const std::vector<std::uint8_t>& done() const { return done_; }
  const std::vector<std::uint8_t>& success() const { return success_; }
  const std::vector<std::uint8_t>& truncated() const { return truncated_; }

  /// Bit-exact fingerprint of kinematic state + step outputs, fixed env
  /// order. Equal hashes across worker counts is the determinism contract.
  std::uint64_t state_hash() const;

 private:
  EpisodeState gather(int i) const;
  void scatter(int i, const EpisodeState& st);
  void reset_slot(int i);

  BatchSpec spec_;
  WorkerPool* pool_ = nullptr;

  // State, one entry per env.
  Eigen::ArrayXd x_, y_, psi_, u_, v_, r_;
  Eigen::ArrayXd prev_d_, prev_r_;
  std::vector<int> t_step_;
  std::vector<std::uint64_t> episode_;
  std::vector<SplitRng> rng_;

  // Per-episode randomized parameters.
  Eigen::ArrayXd xu_, yv_, nr_, xuu_, yvv_, nrr_;
  Eigen::ArrayXd scale_l_, scale_r_;
  Eigen::ArrayXd dist_fox_, dist_foy_, dist_fax_, dist_fay_;
  Eigen::ArrayXd dist_to_, dist_ta_, dist_om_, dist_ph_;
  Eigen::ArrayXd goal_x_, goal_y_;

  // Step outputs.
  Eigen::MatrixXd obs_, final_obs_;
  Eigen::VectorXd rewards_;
  std::vector<std::uint8_t> done_, success_, truncated_;
};

struct BenchResult {
  double env_steps_per_s_single = 0;
  double env_steps_per_s_multi = 0;
  double physics_steps_per_s_single = 0;
  double physics_steps_per_s_multi = 0;
  int workers_multi = 1;
  std::int64_t env_steps_counted = 0;
  std::int64_t physics_steps_counted = 0;
};

/// Measure full-step and integrator-only throughput, single-worker and with
/// `workers` workers (0 = hardware concurrency). Each measurement runs at
/// least `min_duration_s`.
BenchResult throughput_bench(const BatchSpec& spec, int workers,
                             double min_duration_s = 2.0);

}  // namespace asv
