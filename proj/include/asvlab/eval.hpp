#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <vector>

#include "asvlab/env.hpp"
#include "asvlab/threadpool.hpp"

namespace asv {

struct TrajectoryPoint {
  double t = 0;
  double x = 0, y = 0, psi = 0;
  double u = 0, v = 0, r = 0;
  double d = 0;               // true distance to goal
  double a_left = 0, a_right = 0;  // action applied at this state
};

struct EpisodeMetrics {
  int goal_index = -1;
  GoalSpec goal;
  bool success = false;
  double t_capture = 0;  // s; failures carry the full episode duration
  double e_acc = 0;      // sum of |a_l| + |a_r| over steps
  int steps = 0;
  double final_distance = 0;
  std::vector<TrajectoryPoint> trajectory;  // steps+1 rows when recorded
};

/// Sum of |a_l| + |a_r| over a command sequence.
double accumulate_energy(
    const std::vector<std::array<double, 2>>& commands);

/// First trajectory row satisfying the capture condition (distance below
/// `tolerance` while facing the goal within 90 degrees), or -1.
int detect_capture(const std::vector<TrajectoryPoint>& traj,
                   const GoalSpec& goal, double tolerance);

using PolicyFn = std::function<std::array<double, 2>(const Observation&)>;

struct EvalOptions {
  double capture_tolerance = 0.3;  // m
  bool stop_on_capture = true;     // false: run out the episode anyway
  bool keep_trajectories = false;
  std::vector<int> goal_indices;   // empty = the full grid
  int workers = 1;
  std::uint64_t master_seed = 0;
};

struct GridEvalResult {
  std::vector<EpisodeMetrics> episodes;  // one per requested goal, in order
  double success_rate = 0;
};

/// One deterministic episode per goal. Episodes are independent, so the
/// worker count changes wall time only; aggregation is ordered.
GridEvalResult run_grid_eval(const PolicyFn& policy, const WorldSpec& world,
                             const EnvConfig& env_cfg,
                             const RewardParams& reward_params,
                             const EvalOptions& opt);

struct AggregateRow {
  double distance = 0;          // grid radius, m
  int n = 0;
  double success_rate = 0;
  double mean_tc_success = 0;   // NaN when the bucket has no captures
  double mean_eacc_success = 0;
  double mean_tc_all = 0;       // failures count their full duration
  double mean_eacc_all = 0;
};

/// Group episodes by exact goal radius. `distances` empty = the standard
/// {3, 6, 9} m reporting buckets; buckets with no episodes are dropped.
std::vector<AggregateRow> aggregate_by_distance(
    const GridEvalResult& result, const std::vector<double>& distances = {});

void write_aggregate_csv(const std::filesystem::path& path,
                         const std::string& variant,
                         const std::vector<AggregateRow>& rows);

/// goal_###.csv per episode plus manifest.csv. Requires keep_trajectories.
void export_trajectories(const GridEvalResult& result,
                         const std::filesystem::path& dir);

}  // namespace asv
