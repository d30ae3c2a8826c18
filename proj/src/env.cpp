#include "asvlab/env.hpp"

#include <algorithm>
#include <cmath>

namespace asv {

GoalSpec grid_goal(int index) {
  if (index < 0 || index >= kGridGoals)
    throw std::invalid_argument("grid goal index out of range: " +
                                std::to_string(index));
  const int di = index / kGridBearings;
  const int bi = index % kGridBearings;
  const double d = 3.0 + 1.0 * di;
  const double bearing = deg2rad(-45.0 + 5.0 * bi);
  return {d * std::cos(bearing), d * std::sin(bearing)};
}

GoalSpec sample_goal(SplitRng& rng, const EnvConfig& cfg) {
  const double d =
      rng.uniform(cfg.goal_min_distance, cfg.goal_max_distance);
  const double bearing =
      rng.uniform(-cfg.goal_bearing_max, cfg.goal_bearing_max);
  return {d * std::cos(bearing), d * std::sin(bearing)};
}

void relative_goal(const BodyState& b, const GoalSpec& g, double* d,
                   double* delta) {
  const double rx = g.x - b.x;
  const double ry = g.y - b.y;
  *d = std::hypot(rx, ry);
  *delta = wrap_angle(std::atan2(ry, rx) - b.psi);
}

Observation observe(const BodyState& b, const GoalSpec& g,
                    const RandomizationConfig& rc, SplitRng& rng) {
  const double pos = rc.obs_noise ? rc.pos_noise : 0.0;
  const double head = rc.obs_noise ? rc.heading_noise : 0.0;
  const double nx = rng.uniform(-pos, pos);
  const double ny = rng.uniform(-pos, pos);
  const double nh = rng.uniform(-head, head);
  const double rx = g.x - b.x + nx;
  const double ry = g.y - b.y + ny;
  const double delta = wrap_angle(std::atan2(ry, rx) - (b.psi + nh));
  Observation o;
  o.u = b.u;
  o.v = b.v;
  o.r = b.r;
  o.cos_head = std::cos(delta);
  o.sin_head = std::sin(delta);
  o.d = std::hypot(rx, ry);
  return o;
}

Observation observe_clean(const BodyState& b, const GoalSpec& g) {
  double d = 0, delta = 0;
  relative_goal(b, g, &d, &delta);
  Observation o;
  o.u = b.u;
  o.v = b.v;
  o.r = b.r;
  o.cos_head = std::cos(delta);
  o.sin_head = std::sin(delta);
  o.d = d;
  return o;
}

RewardBreakdown reward(double prev_d, double prev_r, const BodyState& next,
                       const GoalSpec& goal,
                       const std::array<double, 2>& action,
                       const RewardParams& rp) {
  double d = 0, delta = 0;
  relative_goal(next, goal, &d, &delta);

  RewardBreakdown r;
  r.dist = rp.lambda1 * (prev_d - d);
  const double d2 = delta * delta;
  r.head = rp.lambda2 * (std::exp(rp.k1 * d2 * d2) + std::exp(rp.k2 * d2));
  const double effort = action[0] * action[0] + action[1] * action[1];
  r.energy = -rp.lambda3 * (std::exp(rp.k3 * effort) - 1.0);
  r.alpha =
      rp.lambda4 * (std::exp(rp.k4 * std::abs(next.r - prev_r)) - 1.0);
  r.time = rp.lambda5;
  r.goal = d < rp.d_threshold ? rp.lambda6 : 0.0;
  return r;
}

EpisodeParams randomize_episode(SplitRng& rng, const WorldSpec& world) {
  const RandomizationConfig& rc = world.randomization;
  EpisodeParams p;
  p.hydro = world.hydro;

  const double j = rc.drag_randomization ? rc.drag_jitter : 0.0;
  p.hydro.xu *= rng.uniform(1.0 - j, 1.0 + j);
  p.hydro.yv *= rng.uniform(1.0 - j, 1.0 + j);
  p.hydro.nr *= rng.uniform(1.0 - j, 1.0 + j);
  p.hydro.xuu *= rng.uniform(1.0 - j, 1.0 + j);
  p.hydro.yvv *= rng.uniform(1.0 - j, 1.0 + j);
  p.hydro.nrr *= rng.uniform(1.0 - j, 1.0 + j);

  p.thrust_scale_left =
      rng.uniform(rc.thrust_scale_low, rc.thrust_scale_high);
  p.thrust_scale_right =
      rng.uniform(rc.thrust_scale_low, rc.thrust_scale_high);

  const double fo = rc.disturbances ? rc.force_offset_max : 0.0;
  const double fa = rc.disturbances ? rc.force_amp_max : 0.0;
  const double to = rc.disturbances ? rc.torque_offset_max : 0.0;
  const double ta = rc.disturbances ? rc.torque_amp_max : 0.0;
  DisturbanceState& d = p.disturbance;
  d.force_offset_x = rng.uniform(-fo, fo);
  d.force_offset_y = rng.uniform(-fo, fo);
  d.force_amp_x = rng.uniform(0.0, fa);
  d.force_amp_y = rng.uniform(0.0, fa);
  d.torque_offset = rng.uniform(-to, to);
  d.torque_amp = rng.uniform(0.0, ta);
  d.omega = rng.uniform(rc.dist_freq_low, rc.dist_freq_high);
  d.phase = rng.uniform(0.0, 2.0 * kPi);
  return p;
}

EpisodeState reset_episode(std::uint64_t master_seed, std::uint64_t env_index,
                           std::uint64_t episode, const WorldSpec& world,
                           const EnvConfig& cfg, int goal_index) {
  EpisodeState st;
  st.rng = SplitRng(master_seed, env_index, episode);
  st.params = randomize_episode(st.rng, world);
  st.goal = goal_index < 0 ? sample_goal(st.rng, cfg)
                           : grid_goal(goal_index);
  st.body = BodyState{};
  st.t_step = 0;
  double delta = 0;
  relative_goal(st.body, st.goal, &st.prev_d, &delta);
  st.prev_r = 0.0;
  return st;
}

Observation episode_obs(EpisodeState& st, const WorldSpec& world) {
  return observe(st.body, st.goal, world.randomization, st.rng);
}

WorldSpec make_training_world(const RunConfig& cfg, const AgentVariant& v) {
  WorldSpec w;
  const DampingCoeffs& d = v.hydro_source == HydroSource::kNominal
                               ? cfg.hydro_nominal
                               : cfg.hydro_identified;
  w.hydro = make_hydro(cfg.hull, d);
  w.thrusters = make_thruster_model(cfg.thruster, v.hydro_source);
  w.randomization = cfg.randomization;
  if (v.thrust_randomization > 0.0) {
    w.randomization.thrust_scale_low = 1.0 - v.thrust_randomization;
    w.randomization.thrust_scale_high = 1.0;
  } else {
    w.randomization.thrust_scale_low = 1.0;
    w.randomization.thrust_scale_high = 1.0;
  }
  return w;
}

WorldSpec make_eval_world(const RunConfig& cfg, bool disturbances) {
  WorldSpec w;
  w.hydro = make_hydro(cfg.hull, cfg.hydro_identified);
  w.thrusters = make_thruster_model(cfg.thruster, HydroSource::kIdentified);
  w.randomization = cfg.randomization;
  w.randomization.obs_noise = false;
  w.randomization.drag_randomization = false;
  w.randomization.action_noise = 0.0;
  w.randomization.thrust_scale_low = 1.0;
  w.randomization.thrust_scale_high = 1.0;
  w.randomization.disturbances = disturbances;
  return w;
}

StepResult env_step(EpisodeState& st, std::array<double, 2> action,
                    const WorldSpec& world, const EnvConfig& cfg,
                    const RewardParams& rp) {
  if (st.done)
    throw std::logic_error("env_step called on a finished episode");

  const std::array<double, 2> commanded = {
      std::clamp(action[0], -1.0, 1.0), std::clamp(action[1], -1.0, 1.0)};

  const double an = world.randomization.action_noise;
  const double actual_l = commanded[0] + st.rng.uniform(-an, an);
  const double actual_r = commanded[1] + st.rng.uniform(-an, an);

  const double t_now = st.t_step * cfg.dt;
  const Wrench tau =
      thruster_wrench(actual_l, actual_r, world.thrusters.left,
                      world.thrusters.right, world.thrusters.separation,
                      st.params.thrust_scale_left,
                      st.params.thrust_scale_right) +
      disturbance_wrench(st.params.disturbance, t_now, st.body.psi);

  st.body = step(st.body, tau, st.params.hydro, cfg.dt);
  st.t_step += 1;

  StepResult out;
  out.reward = reward(st.prev_d, st.prev_r, st.body, st.goal, commanded, rp);

  double d = 0, delta = 0;
  relative_goal(st.body, st.goal, &d, &delta);
  st.prev_d = d;
  st.prev_r = st.body.r;

  if (d < rp.d_threshold) {
    out.done = true;
    out.success = true;
  } else if (st.t_step >= cfg.max_steps || d > cfg.runaway_distance) {
    out.done = true;
    out.truncated = true;
  }
  st.done = out.done;
  st.success = out.success;
  st.truncated = out.truncated;

  out.obs = observe(st.body, st.goal, world.randomization, st.rng);
  return out;
}

}  // namespace asv
