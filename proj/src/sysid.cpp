#include "asvlab/sysid.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <Eigen/Dense>

#include "asvlab/rng.hpp"

namespace asv {

namespace {

double rms_residual(const std::vector<SteadyStateSample>& s, double lin,
                    double quad) {
  double acc = 0;
  for (const auto& p : s) {
    const double pred = lin * p.velocity + quad * p.velocity *
                                               std::abs(p.velocity);
    acc += (p.applied - pred) * (p.applied - pred);
  }
  return std::sqrt(acc / static_cast<double>(s.size()));
}

}  // namespace

DragFit fit_quadratic_drag(const std::vector<SteadyStateSample>& samples) {
  std::set<double> distinct;
  for (const auto& s : samples) {
    if (!std::isfinite(s.applied) || !std::isfinite(s.velocity))
      throw std::invalid_argument("drag fit: non-finite sample");
    if (s.velocity != 0.0 && s.applied * s.velocity < 0.0)
      throw std::invalid_argument(
          "drag fit: applied and velocity disagree in sign (v = " +
          std::to_string(s.velocity) + ")");
    if (s.velocity != 0.0) distinct.insert(s.velocity);
  }
  if (distinct.size() < 2)
    throw std::invalid_argument(
        "drag fit: need at least two samples with distinct nonzero "
        "velocities");

  const Eigen::Index n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = samples[static_cast<std::size_t>(i)].velocity;
    a(i, 0) = v;
    a(i, 1) = v * std::abs(v);
    b(i) = samples[static_cast<std::size_t>(i)].applied;
  }

  // Unconstrained solution; if it lands in the feasible quadrant it is the
  // constrained optimum too.
  const Eigen::Vector2d full = a.colPivHouseholderQr().solve(b);
  double best_lin, best_quad;
  if (full(0) >= 0.0 && full(1) >= 0.0) {
    best_lin = full(0);
    best_quad = full(1);
  } else {
    // Active-set enumeration: with two parameters, some constraint is tight,
    // so the optimum is one of the single-column fits (clamped nonnegative).
    const double lin_only =
        std::max(0.0, a.col(0).dot(b) / a.col(0).squaredNorm());
    const double quad_only =
        std::max(0.0, a.col(1).dot(b) / a.col(1).squaredNorm());
    const double r_lin = (b - lin_only * a.col(0)).squaredNorm();
    const double r_quad = (b - quad_only * a.col(1)).squaredNorm();
    if (r_lin <= r_quad) {
      best_lin = lin_only;
      best_quad = 0.0;
    } else {
      best_lin = 0.0;
      best_quad = quad_only;
    }
  }
  return {best_lin, best_quad, rms_residual(samples, best_lin, best_quad)};
}

ThrusterCurve fit_thruster_curve(const std::vector<BollardSample>& samples) {
  if (samples.size() < 3)
    throw std::invalid_argument("thruster fit: need at least 3 samples");
  bool has_neg = false, has_pos = false;
  for (const auto& s : samples) {
    if (!std::isfinite(s.command) || !std::isfinite(s.force))
      throw std::invalid_argument("thruster fit: non-finite sample");
    if (s.command < -1.0 || s.command > 1.0)
      throw std::invalid_argument("thruster fit: command " +
                                  std::to_string(s.command) +
                                  " outside [-1, 1]");
    has_neg |= s.command < 0.0;
    has_pos |= s.command > 0.0;
  }
  if (!has_neg || !has_pos)
    throw std::invalid_argument(
        "thruster fit: samples must include both negative and positive "
        "commands");

  std::vector<BollardSample> sorted = samples;
  std::sort(sorted.begin(), sorted.end(),
            [](const BollardSample& a, const BollardSample& b) {
              return a.command < b.command;
            });

  // Average repeated commands; keep the multiplicity as the block weight.
  std::vector<double> cmd, mean, weight;
  for (const auto& s : sorted) {
    if (!cmd.empty() && s.command == cmd.back()) {
      mean.back() =
          (mean.back() * weight.back() + s.force) / (weight.back() + 1.0);
      weight.back() += 1.0;
    } else {
      cmd.push_back(s.command);
      mean.push_back(s.force);
      weight.push_back(1.0);
    }
  }

  // Weighted pool-adjacent-violators: merge any block that dips below its
  // predecessor into a weighted mean, then re-check backwards.
  std::vector<double> value, w;
  std::vector<std::size_t> span;  // how many command points each block covers
  for (std::size_t i = 0; i < cmd.size(); ++i) {
    value.push_back(mean[i]);
    w.push_back(weight[i]);
    span.push_back(1);
    while (value.size() >= 2 && value[value.size() - 2] > value.back()) {
      const double merged_w = w[w.size() - 2] + w.back();
      value[value.size() - 2] =
          (value[value.size() - 2] * w[w.size() - 2] +
           value.back() * w.back()) /
          merged_w;
      w[w.size() - 2] = merged_w;
      span[span.size() - 2] += span.back();
      value.pop_back();
      w.pop_back();
      span.pop_back();
    }
  }

  // Expand blocks back to one fitted value per distinct command.
  std::vector<double> fitted(cmd.size());
  std::size_t at = 0;
  for (std::size_t blk = 0; blk < value.size(); ++blk)
    for (std::size_t j = 0; j < span[blk]; ++j) fitted[at++] = value[blk];

  // Physical anchoring: a knot at 0 with zero force, reverse side clamped
  // nonpositive, forward side nonnegative. No-ops for sane bollard data.
  std::vector<double> kc, kf;
  bool zero_inserted = false;
  for (std::size_t i = 0; i < cmd.size(); ++i) {
    if (!zero_inserted && cmd[i] >= 0.0) {
      kc.push_back(0.0);
      kf.push_back(0.0);
      zero_inserted = true;
      if (cmd[i] == 0.0) continue;  // measured zero row replaced by the pin
    }
    kc.push_back(cmd[i]);
    kf.push_back(cmd[i] < 0.0 ? std::min(fitted[i], 0.0)
                              : std::max(fitted[i], 0.0));
  }
  if (!zero_inserted) {
    kc.push_back(0.0);
    kf.push_back(0.0);
  }
  return ThrusterCurve(std::move(kc), std::move(kf));
}

namespace {

std::vector<double> default_levels(const HydroParams& p, bool yaw) {
  // Spread terminal speeds over roughly [0.12, 1.5] (m/s or rad/s): dense
  // enough to separate linear from quadratic drag, wide enough that noise
  // cannot collapse the design matrix.
  const double lin = yaw ? p.nr : p.xu;
  const double quad = yaw ? p.nrr : p.xuu;
  std::vector<double> levels;
  for (double v = 0.125; v <= 1.51; v += 0.125)
    levels.push_back(lin * v + quad * v * v);
  return levels;
}

SynthResult synth_axis(const HydroParams& p, const SynthOptions& opt,
                       bool yaw) {
  SynthOptions o = opt;
  if (o.levels.empty()) o.levels = default_levels(p, yaw);
  if (o.repeats < 1)
    throw std::invalid_argument("SynthOptions::repeats must be >= 1");
  SynthResult out;
  SplitRng rng(o.seed, kStreamBench, yaw ? 1 : 0);
  for (double level : o.levels) {
    SteadyStateRun run =
        yaw ? simulate_rotation_test(p, level, o.duration_s, o.dt)
            : simulate_acceleration_test(p, level, o.duration_s, o.dt);
    if (!run.converged) {
      out.skipped_levels.push_back(level);
      out.runs.push_back(std::move(run));
      continue;
    }
    double v = run.steady_velocity;
    if (o.velocity_noise > 0.0) {
      // The rig reads the settled velocity `repeats` times and reports the
      // mean; each reading carries independent multiplicative noise.
      double sum = 0.0;
      for (int i = 0; i < o.repeats; ++i)
        sum += v * rng.uniform(1.0 - o.velocity_noise, 1.0 + o.velocity_noise);
      v = sum / o.repeats;
    }
    out.steady.push_back({level, v});
    out.runs.push_back(std::move(run));
  }
  return out;
}

}  // namespace

SynthResult synth_acceleration_data(const HydroParams& p,
                                    const SynthOptions& opt) {
  return synth_axis(p, opt, false);
}

SynthResult synth_rotation_data(const HydroParams& p,
                                const SynthOptions& opt) {
  return synth_axis(p, opt, true);
}

}  // namespace asv
