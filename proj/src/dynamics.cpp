#include "asvlab/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace asv {

Wrench damping_wrench(const BodyVel& nu, const HydroParams& p) {
  return {-(p.xu + p.xuu * std::abs(nu.u)) * nu.u,
          -(p.yv + p.yvv * std::abs(nu.v)) * nu.v,
          -(p.nr + p.nrr * std::abs(nu.r)) * nu.r};
}

ThrusterCurve::ThrusterCurve(std::vector<double> command,
                             std::vector<double> force)
    : command_(std::move(command)), force_(std::move(force)) {
  if (command_.size() < 2 || command_.size() != force_.size())
    throw std::invalid_argument("thruster curve needs >= 2 matched knots");
  for (std::size_t i = 1; i < command_.size(); ++i) {
    if (command_[i] <= command_[i - 1])
      throw std::invalid_argument(
          "thruster curve commands must be strictly increasing");
    if (force_[i] < force_[i - 1])
      throw std::invalid_argument(
          "thruster curve forces must be nondecreasing");
  }
  if ((*this)(0.0) != 0.0)
    throw std::invalid_argument("thruster curve must map command 0 to 0 N");
}

double ThrusterCurve::operator()(double command) const {
  if (command <= command_.front()) return force_.front();
  if (command >= command_.back()) return force_.back();
  const auto it =
      std::upper_bound(command_.begin(), command_.end(), command);
  const std::size_t hi = static_cast<std::size_t>(it - command_.begin());
  const std::size_t lo = hi - 1;
  const double w =
      (command - command_[lo]) / (command_[hi] - command_[lo]);
  return force_[lo] + w * (force_[hi] - force_[lo]);
}

ThrusterCurve nominal_curve(const ThrusterConfig& cfg) {
  return ThrusterCurve({-1.0, 0.0, 1.0},
                       {-cfg.force_reverse, 0.0, cfg.force_forward});
}

ThrusterModel make_thruster_model(const ThrusterConfig& cfg,
                                  HydroSource source) {
  ThrusterModel m;
  m.separation = cfg.separation;
  const ThrusterCurve nominal = nominal_curve(cfg);
  if (source == HydroSource::kIdentified &&
      !cfg.identified_left.command.empty())
    m.left = ThrusterCurve(cfg.identified_left.command,
                           cfg.identified_left.force);
  else
    m.left = nominal;
  if (source == HydroSource::kIdentified &&
      !cfg.identified_right.command.empty())
    m.right = ThrusterCurve(cfg.identified_right.command,
                            cfg.identified_right.force);
  else
    m.right = nominal;
  return m;
}

Wrench thruster_wrench(double cmd_left, double cmd_right,
                       const ThrusterCurve& left, const ThrusterCurve& right,
                       double separation, double scale_left,
                       double scale_right) {
  cmd_left = std::clamp(cmd_left, -1.0, 1.0);
  cmd_right = std::clamp(cmd_right, -1.0, 1.0);
  const double f_left = scale_left * left(cmd_left);
  const double f_right = scale_right * right(cmd_right);
  return {f_left + f_right, 0.0, (f_right - f_left) * separation * 0.5};
}

Wrench thruster_wrench(double cmd_left, double cmd_right,
                       const ThrusterModel& m) {
  return thruster_wrench(cmd_left, cmd_right, m.left, m.right, m.separation,
                         m.scale_left, m.scale_right);
}

Wrench disturbance_wrench(const DisturbanceState& d, double t, double psi) {
  const double s = std::sin(d.omega * t + d.phase);
  const double fx_world = d.force_offset_x + d.force_amp_x * s;
  const double fy_world = d.force_offset_y + d.force_amp_y * s;
  const double c = std::cos(psi), sn = std::sin(psi);
  // World-to-body rotation (transpose of the body-to-world map).
  return {c * fx_world + sn * fy_world, -sn * fx_world + c * fy_world,
          d.torque_offset + d.torque_amp * s};
}

BodyState step(const BodyState& s, const Wrench& applied,
               const HydroParams& p, double dt) {
  if (!(dt > 0.0))
    throw std::invalid_argument("step: dt must be positive");
  const Wrench damp = damping_wrench({s.u, s.v, s.r}, p);
  const double mu = p.mass + p.added_mass_u;
  const double mv = p.mass + p.added_mass_v;
  const double mr = p.iz + p.added_mass_r;

  BodyState n;
  n.u = s.u + dt * (applied.fx + damp.fx) / mu;
  n.v = s.v + dt * (applied.fy + damp.fy) / mv;
  n.r = s.r + dt * (applied.nz + damp.nz) / mr;

  const double c = std::cos(s.psi), sn = std::sin(s.psi);
  n.x = s.x + dt * (n.u * c - n.v * sn);
  n.y = s.y + dt * (n.u * sn + n.v * c);
  n.psi = wrap_angle(s.psi + dt * n.r);
  return n;
}

double equilibrium_draft(const HullConfig& hull) {
  const double draft =
      hull.mass / (hull.water_density * hull.waterplane_area);
  if (draft > hull.hull_height)
    throw ConfigError("equilibrium draft " + std::to_string(draft) +
                      " m exceeds hull height " +
                      std::to_string(hull.hull_height) +
                      " m: hull cannot displace its own weight");
  return draft;
}

namespace {

SteadyStateRun run_constant_wrench(const HydroParams& p, const Wrench& w,
                                   double duration_s, double dt,
                                   bool yaw_axis) {
  if (!(duration_s > 0.0))
    throw std::invalid_argument("test duration must be positive");
  SteadyStateRun run;
  run.applied = yaw_axis ? w.nz : w.fx;
  const int n_steps = static_cast<int>(std::llround(duration_s / dt));
  run.t.reserve(n_steps + 1);
  run.velocity.reserve(n_steps + 1);
  BodyState s;
  run.t.push_back(0.0);
  run.velocity.push_back(0.0);
  for (int k = 1; k <= n_steps; ++k) {
    s = step(s, w, p, dt);
    run.t.push_back(k * dt);
    run.velocity.push_back(yaw_axis ? s.r : s.u);
  }
  // Converged when the trailing 10% of the trace is flat to 1e-4. The
  // discrete update's fixed point is the exact terminal velocity, so the
  // final sample is the best steady-state estimate once the trace is flat.
  const std::size_t tail =
      std::max<std::size_t>(2, run.velocity.size() / 10);
  const std::size_t begin = run.velocity.size() - tail;
  double lo = run.velocity[begin], hi = run.velocity[begin];
  for (std::size_t i = begin; i < run.velocity.size(); ++i) {
    lo = std::min(lo, run.velocity[i]);
    hi = std::max(hi, run.velocity[i]);
  }
  run.converged = (hi - lo) < 1e-4;
  run.steady_velocity = run.velocity.back();
  return run;
}

}  // namespace

SteadyStateRun simulate_acceleration_test(const HydroParams& p,
                                          double force_n, double duration_s,
                                          double dt) {
  return run_constant_wrench(p, {force_n, 0.0, 0.0}, duration_s, dt, false);
}

SteadyStateRun simulate_rotation_test(const HydroParams& p, double torque_nm,
                                      double duration_s, double dt) {
  return run_constant_wrench(p, {0.0, 0.0, torque_nm}, duration_s, dt, true);
}

}  // namespace asv
