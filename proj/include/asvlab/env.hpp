#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Dense>

#include "asvlab/dynamics.hpp"
#include "asvlab/rng.hpp"

namespace asv {

struct GoalSpec {
  double x = 0, y = 0;  // world frame, m
};

/// 7 distances (3..9 m, 1 m apart) x 19 bearings (-45..45 deg, 5 deg apart),
/// row-major by distance. Index 0 is 3 m at -45 deg.
inline constexpr int kGridDistances = 7;
inline constexpr int kGridBearings = 19;
inline constexpr int kGridGoals = kGridDistances * kGridBearings;

GoalSpec grid_goal(int index);

/// Training goal: distance ~ U(min, max), bearing ~ U(-max_bearing, +max).
/// Consumes exactly two draws.
GoalSpec sample_goal(SplitRng& rng, const EnvConfig& cfg);

// ---------------------------------------------------------------------------
// Observation
// ---------------------------------------------------------------------------

inline constexpr int kObsDim = 6;
inline constexpr int kActDim = 2;

/// [u, v, r, cos(delta), sin(delta), d]: body velocities, heading error to
/// the (noisy) goal, distance to the (noisy) goal.
struct Observation {
  double u = 0, v = 0, r = 0;
  double cos_head = 0, sin_head = 0;
  double d = 0;

  Eigen::Matrix<double, kObsDim, 1> vec() const {
    Eigen::Matrix<double, kObsDim, 1> o;
    o << u, v, r, cos_head, sin_head, d;
    return o;
  }
};

/// Relative distance and heading error without sensor noise.
void relative_goal(const BodyState& b, const GoalSpec& g, double* d,
                   double* delta);

/// Observation with sensor noise: goal position perturbed by +-pos_noise per
/// axis, heading error by +-heading_noise. Exactly three draws, taken even
/// when the magnitudes are zero so streams stay aligned.
Observation observe(const BodyState& b, const GoalSpec& g,
                    const RandomizationConfig& rc, SplitRng& rng);

/// Noise-free variant used for evaluation and diagnostics.
Observation observe_clean(const BodyState& b, const GoalSpec& g);

// ---------------------------------------------------------------------------
// Reward
// ---------------------------------------------------------------------------

struct RewardBreakdown {
  double dist = 0;    // progress toward the goal
  double head = 0;    // heading alignment shaping
  double energy = 0;  // thrust magnitude penalty
  double alpha = 0;   // yaw-rate change penalty
  double time = 0;    // constant per-step penalty
  double goal = 0;    // capture bonus

  double total() const {
    return dist + head + energy + alpha + time + goal;
  }
};

/// Reward for arriving in `next` from a state that was `prev_d` from the goal
/// with yaw rate `prev_r`, having commanded `action` (pre-noise values; the
/// agent pays for what it asked, not for actuator jitter).
RewardBreakdown reward(double prev_d, double prev_r, const BodyState& next,
                       const GoalSpec& goal,
                       const std::array<double, 2>& action,
                       const RewardParams& rp);

// ---------------------------------------------------------------------------
// Episode state machine
// ---------------------------------------------------------------------------

/// Everything resampled at episode start by domain randomization.
struct EpisodeParams {
  HydroParams hydro;
  double thrust_scale_left = 1.0;
  double thrust_scale_right = 1.0;
  DisturbanceState disturbance;
};

/// The world an episode runs in: base physics plus which randomizations are
/// live. Shared by every episode of a run; per-episode draws go to
/// EpisodeParams.
struct WorldSpec {
  HydroParams hydro;
  ThrusterModel thrusters;
  RandomizationConfig randomization;
};

struct EpisodeState {
  BodyState body;
  GoalSpec goal;
  EpisodeParams params;
  SplitRng rng;
  int t_step = 0;
  double prev_d = 0, prev_r = 0;
  bool done = false, success = false, truncated = false;
};

/// Per-episode randomization draws, in a fixed order: damping jitter (6),
/// thrust scales (2), disturbance (8), then the goal. Ranges collapse to
/// points when a randomization is disabled, keeping the draw count constant.
EpisodeParams randomize_episode(SplitRng& rng, const WorldSpec& world);

/// Fresh episode at the origin, at rest, heading along +x. goal_index < 0
/// samples a training goal; otherwise the fixed grid goal is used.
EpisodeState reset_episode(std::uint64_t master_seed, std::uint64_t env_index,
                           std::uint64_t episode, const WorldSpec& world,
                           const EnvConfig& cfg, int goal_index = -1);

/// Observation of the episode's current state, consuming the episode's own
/// noise draws. Gives the reset observation; env_step draws the rest.
Observation episode_obs(EpisodeState& st, const WorldSpec& world);

/// Training world for an agent variant: the variant picks the damping set
/// and thruster curves and scales the thrust randomization; everything else
/// comes straight from the config.
WorldSpec make_training_world(const RunConfig& cfg, const AgentVariant& v);

/// Evaluation world: identified physics, unit thrust scales, no sensor or
/// actuator noise, no drag jitter. Disturbances by flag.
WorldSpec make_eval_world(const RunConfig& cfg, bool disturbances);

struct StepResult {
  Observation obs;  // of the post-step state (pre-reset when done)
  RewardBreakdown reward;
  bool done = false;
  bool success = false;    // capture: d < d_threshold
  bool truncated = false;  // timeout or runaway; bootstrap the value
};

/// Advance one control step: actuator noise on the commands, thrust +
/// disturbance wrenches, dynamics step, reward, termination. Throws
/// std::logic_error if called on a finished episode.
StepResult env_step(EpisodeState& st, std::array<double, 2> action,
                    const WorldSpec& world, const EnvConfig& cfg,
                    const RewardParams& rp);

}  // namespace asv
