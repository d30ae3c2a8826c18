#include "asvlab/batch.hpp"

#include <chrono>
#include <cmath>

namespace asv {

BatchEnv::BatchEnv(const BatchSpec& spec, WorkerPool* pool)
    : spec_(spec), pool_(pool) {
  const int n = spec_.n_envs;
  if (n < 1) throw std::invalid_argument("BatchEnv: n_envs must be >= 1");
  for (Eigen::ArrayXd* a :
       {&x_, &y_, &psi_, &u_, &v_, &r_, &prev_d_, &prev_r_, &xu_, &yv_, &nr_,
        &xuu_, &yvv_, &nrr_, &scale_l_, &scale_r_, &dist_fox_, &dist_foy_,
        &dist_fax_, &dist_fay_, &dist_to_, &dist_ta_, &dist_om_, &dist_ph_,
        &goal_x_, &goal_y_})
    a->setZero(n);
  t_step_.assign(n, 0);
  episode_.assign(n, 0);
  rng_.assign(n, SplitRng());
  obs_.setZero(n, kObsDim);
  final_obs_.setZero(n, kObsDim);
  rewards_.setZero(n);
  done_.assign(n, 0);
  success_.assign(n, 0);
  truncated_.assign(n, 0);
  reset();
}

EpisodeState BatchEnv::gather(int i) const {
  EpisodeState st;
  st.body = {x_[i], y_[i], psi_[i], u_[i], v_[i], r_[i]};
  st.goal = {goal_x_[i], goal_y_[i]};
  st.params.hydro = spec_.world.hydro;
  st.params.hydro.xu = xu_[i];
  st.params.hydro.yv = yv_[i];
  st.params.hydro.nr = nr_[i];
  st.params.hydro.xuu = xuu_[i];
  st.params.hydro.yvv = yvv_[i];
  st.params.hydro.nrr = nrr_[i];
  st.params.thrust_scale_left = scale_l_[i];
  st.params.thrust_scale_right = scale_r_[i];
  st.params.disturbance = {dist_fox_[i], dist_foy_[i], dist_fax_[i],
                           dist_fay_[i], dist_to_[i],  dist_ta_[i],
                           dist_om_[i],  dist_ph_[i]};
  st.rng = rng_[i];
  st.t_step = t_step_[i];
  st.prev_d = prev_d_[i];
  st.prev_r = prev_r_[i];
  return st;
}

void BatchEnv::scatter(int i, const EpisodeState& st) {
  x_[i] = st.body.x;
  y_[i] = st.body.y;
  psi_[i] = st.body.psi;
  u_[i] = st.body.u;
  v_[i] = st.body.v;
  r_[i] = st.body.r;
  goal_x_[i] = st.goal.x;
  goal_y_[i] = st.goal.y;
  xu_[i] = st.params.hydro.xu;
  yv_[i] = st.params.hydro.yv;
  nr_[i] = st.params.hydro.nr;
  xuu_[i] = st.params.hydro.xuu;
  yvv_[i] = st.params.hydro.yvv;
  nrr_[i] = st.params.hydro.nrr;
  scale_l_[i] = st.params.thrust_scale_left;
  scale_r_[i] = st.params.thrust_scale_right;
  dist_fox_[i] = st.params.disturbance.force_offset_x;
  dist_foy_[i] = st.params.disturbance.force_offset_y;
  dist_fax_[i] = st.params.disturbance.force_amp_x;
  dist_fay_[i] = st.params.disturbance.force_amp_y;
  dist_to_[i] = st.params.disturbance.torque_offset;
  dist_ta_[i] = st.params.disturbance.torque_amp;
  dist_om_[i] = st.params.disturbance.omega;
  dist_ph_[i] = st.params.disturbance.phase;
  rng_[i] = st.rng;
  t_step_[i] = st.t_step;
  prev_d_[i] = st.prev_d;
  prev_r_[i] = st.prev_r;
}

void BatchEnv::reset_slot(int i) {
  EpisodeState st =
      reset_episode(spec_.master_seed, static_cast<std::uint64_t>(i),
                    episode_[i], spec_.world, spec_.env, spec_.goal_index);
  obs_.row(i) = episode_obs(st, spec_.world).vec();
  scatter(i, st);
}

void BatchEnv::reset() {
  auto body = [this](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) reset_slot(static_cast<int>(i));
  };
  if (pool_)
    pool_->parallel_for(spec_.n_envs, body);
  else
    body(0, spec_.n_envs);
}

void BatchEnv::step(const Eigen::Ref<const Eigen::MatrixX2d>& actions) {
  if (actions.rows() != spec_.n_envs)
    throw std::invalid_argument("BatchEnv::step: action rows != n_envs");
  auto body = [this, &actions](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) {
      const int k = static_cast<int>(i);
      EpisodeState st = gather(k);
      StepResult res = env_step(st, {actions(k, 0), actions(k, 1)},
                                spec_.world, spec_.env, spec_.reward);
      rewards_[k] = res.reward.total();
      done_[k] = res.done;
      success_[k] = res.success;
      truncated_[k] = res.truncated;
      if (res.done) {
        final_obs_.row(k) = res.obs.vec();
        episode_[k] += 1;
        reset_slot(k);
      } else {
        obs_.row(k) = res.obs.vec();
        scatter(k, st);
      }
    }
  };
  if (pool_)
    pool_->parallel_for(spec_.n_envs, body);
  else
    body(0, spec_.n_envs);
}

void BatchEnv::step_physics(
    const Eigen::Ref<const Eigen::MatrixX2d>& actions) {
  if (actions.rows() != spec_.n_envs)
    throw std::invalid_argument(
        "BatchEnv::step_physics: action rows != n_envs");
  auto body = [this, &actions](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) {
      const int k = static_cast<int>(i);
      BodyState s{x_[k], y_[k], psi_[k], u_[k], v_[k], r_[k]};
      HydroParams h = spec_.world.hydro;
      h.xu = xu_[k];
      h.yv = yv_[k];
      h.nr = nr_[k];
      h.xuu = xuu_[k];
      h.yvv = yvv_[k];
      h.nrr = nrr_[k];
      const Wrench tau =
          thruster_wrench(actions(k, 0), actions(k, 1),
                          spec_.world.thrusters.left,
                          spec_.world.thrusters.right,
                          spec_.world.thrusters.separation, scale_l_[k],
                          scale_r_[k]) +
          disturbance_wrench(
              {dist_fox_[k], dist_foy_[k], dist_fax_[k], dist_fay_[k],
               dist_to_[k], dist_ta_[k], dist_om_[k], dist_ph_[k]},
              t_step_[k] * spec_.env.dt, s.psi);
      s = asv::step(s, tau, h, spec_.env.dt);
      x_[k] = s.x;
      y_[k] = s.y;
      psi_[k] = s.psi;
      u_[k] = s.u;
      v_[k] = s.v;
      r_[k] = s.r;
      t_step_[k] += 1;
    }
  };
  if (pool_)
    pool_->parallel_for(spec_.n_envs, body);
  else
    body(0, spec_.n_envs);
}

std::uint64_t BatchEnv::state_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  const auto n = static_cast<std::size_t>(spec_.n_envs);
  for (const Eigen::ArrayXd* a : {&x_, &y_, &psi_, &u_, &v_, &r_, &prev_d_,
                                  &prev_r_, &goal_x_, &goal_y_})
    h = fnv1a(a->data(), n * sizeof(double), h);
  h = fnv1a(t_step_.data(), n * sizeof(int), h);
  h = fnv1a(episode_.data(), n * sizeof(std::uint64_t), h);
  h = fnv1a(obs_.data(), obs_.size() * sizeof(double), h);
  h = fnv1a(rewards_.data(), n * sizeof(double), h);
  h = fnv1a(done_.data(), n, h);
  h = fnv1a(success_.data(), n, h);
  h = fnv1a(truncated_.data(), n, h);
  return h;
}

namespace {

Eigen::MatrixX2d bench_actions(int n) {
  // Deterministic, spread over the command range so the curve lookup and
  // both damping regimes get exercised.
  Eigen::MatrixX2d a(n, 2);
  SplitRng rng(42, kStreamBench, 0);
  for (int i = 0; i < n; ++i) {
    a(i, 0) = rng.uniform(-1.0, 1.0);
    a(i, 1) = rng.uniform(-1.0, 1.0);
  }
  return a;
}

template <typename StepFn>
std::pair<double, std::int64_t> measure(BatchEnv& env, StepFn&& fn,
                                        double min_duration_s) {
  using clock = std::chrono::steady_clock;
  // Warmup: touch every page and settle the caches.
  for (int k = 0; k < 3; ++k) fn();
  std::int64_t iters = 0;
  const auto t0 = clock::now();
  double elapsed = 0;
  do {
    for (int k = 0; k < 16; ++k) fn();
    iters += 16;
    elapsed = std::chrono::duration<double>(clock::now() - t0).count();
  } while (elapsed < min_duration_s);
  const std::int64_t steps =
      iters * static_cast<std::int64_t>(env.n_envs());
  return {static_cast<double>(steps) / elapsed, steps};
}

}  // namespace

BenchResult throughput_bench(const BatchSpec& spec, int workers,
                             double min_duration_s) {
  BenchResult out;
  const Eigen::MatrixX2d actions = bench_actions(spec.n_envs);
  out.workers_multi = WorkerPool::resolve_workers(workers);

  {
    BatchEnv env(spec, nullptr);
    auto [rate, steps] =
        measure(env, [&] { env.step(actions); }, min_duration_s);
    out.env_steps_per_s_single = rate;
    out.env_steps_counted = steps;
    env.reset();
    auto [prate, psteps] =
        measure(env, [&] { env.step_physics(actions); }, min_duration_s);
    out.physics_steps_per_s_single = prate;
    out.physics_steps_counted = psteps;
  }
  {
    WorkerPool pool(out.workers_multi);
    BatchEnv env(spec, &pool);
    auto [rate, steps] =
        measure(env, [&] { env.step(actions); }, min_duration_s);
    out.env_steps_per_s_multi = rate;
    out.env_steps_counted += steps;
    env.reset();
    auto [prate, psteps] =
        measure(env, [&] { env.step_physics(actions); }, min_duration_s);
    out.physics_steps_per_s_multi = prate;
    out.physics_steps_counted += psteps;
  }
  return out;
}

}  // namespace asv
