#pragma once

#include <vector>

#include "asvlab/dynamics.hpp"

namespace asv {

/// One steady-state operating point: constant applied force (or torque)
/// against the terminal velocity (or yaw rate) it produced. Applied and
/// velocity must share sign; zero rows are tolerated but carry no
/// information.
struct SteadyStateSample {
  double applied = 0;   // N or N m
  double velocity = 0;  // m/s or rad/s
};

struct DragFit {
  double linear = 0;     // N s/m (or N m s/rad)
  double quadratic = 0;  // N s^2/m^2 (or N m s^2/rad^2)
  double residual_rms = 0;
};

/// Least-squares fit of applied = linear*v + quadratic*v|v| with both
/// coefficients constrained nonnegative (drag cannot pump energy in).
/// Solved exactly: the unconstrained solution is kept when feasible,
/// otherwise the better of the two single-coefficient fits wins, which is
/// the full active-set enumeration for two parameters. Requires at least two
/// samples with distinct nonzero velocities.
DragFit fit_quadratic_drag(const std::vector<SteadyStateSample>& samples);

/// One bollard-pull measurement: commanded value in [-1, 1] against measured
/// force.
struct BollardSample {
  double command = 0;
  double force = 0;  // N
};

/// Monotone piecewise-linear thruster curve via isotonic regression
/// (pool-adjacent-violators on the command-sorted samples; duplicate
/// commands are averaged first). The result always contains a knot at
/// command 0 with force 0; negative-command knots clamp to <= 0 and
/// positive-command knots to >= 0 so the curve can never push the wrong way.
/// Requires >= 3 samples spanning both signs of command.
ThrusterCurve fit_thruster_curve(const std::vector<BollardSample>& samples);

// ---------------------------------------------------------------------------
// Synthetic test-rig data (closes the loop: simulate, fit, compare).
// ---------------------------------------------------------------------------

struct SynthOptions {
  std::vector<double> levels;   // applied forces/torques; empty = defaults
  double duration_s = 180.0;    // long enough that the transient is gone
  double dt = kDefaultDt;
  double velocity_noise = 0.0;  // multiplicative, U(1-n, 1+n) per reading
  // Noisy readings averaged into each steady-state sample. Regressor noise in
  // the drag fit biases the small linear coefficient (quadratic leakage
  // ~ quad * var(noise) * design factor); averaging k readings cuts the bias
  // by k and the spread by sqrt(k). No effect when velocity_noise == 0.
  int repeats = 32;
  std::uint64_t seed = 0;
};

struct SynthResult {
  std::vector<SteadyStateSample> steady;   // converged levels only
  std::vector<SteadyStateRun> runs;        // everything, traces included
  std::vector<double> skipped_levels;      // did not converge in duration_s
};

SynthResult synth_acceleration_data(const HydroParams& p,
                                    const SynthOptions& opt);
SynthResult synth_rotation_data(const HydroParams& p,
                                const SynthOptions& opt);

}  // namespace asv
