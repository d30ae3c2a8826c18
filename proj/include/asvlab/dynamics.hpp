#pragma once

#include <vector>

#include <Eigen/Dense>

#include "asvlab/common.hpp"
#include "asvlab/config.hpp"

namespace asv {

/// Planar pose + body-frame velocity. x/y in the world frame, psi the heading
/// (world x-axis toward body x-axis, positive counterclockwise, kept in
/// (-pi, pi]), u surge, v sway, r yaw rate.
struct BodyState {
  double x = 0, y = 0, psi = 0;
  double u = 0, v = 0, r = 0;
};

/// Generalized planar force in the body frame.
struct Wrench {
  double fx = 0, fy = 0, nz = 0;

  Wrench operator+(const Wrench& o) const {
    return {fx + o.fx, fy + o.fy, nz + o.nz};
  }
};

struct BodyVel {
  double u = 0, v = 0, r = 0;
};

/// Hydrodynamic damping wrench acting on the body: linear plus quadratic
/// drag, opposing motion on each axis independently.
Wrench damping_wrench(const BodyVel& nu, const HydroParams& p);

// ---------------------------------------------------------------------------
// Thrusters
// ---------------------------------------------------------------------------

/// Piecewise-linear command-to-force map. Commands outside the knot range
/// saturate at the end forces.
class ThrusterCurve {
 public:
  ThrusterCurve() = default;
  ThrusterCurve(std::vector<double> command, std::vector<double> force);

  double operator()(double command) const;
  const std::vector<double>& knots_command() const { return command_; }
  const std::vector<double>& knots_force() const { return force_; }

 private:
  std::vector<double> command_{-1.0, 0.0, 1.0};
  std::vector<double> force_{-12.5, 0.0, 25.0};
};

struct ThrusterModel {
  ThrusterCurve left, right;
  double separation = 0.76;  // m
  double scale_left = 1.0;   // multiplies curve output
  double scale_right = 1.0;
};

ThrusterCurve nominal_curve(const ThrusterConfig& cfg);

/// The pair of curves an agent variant trains against (identified curves fall
/// back to the nominal shape when the config carries none).
ThrusterModel make_thruster_model(const ThrusterConfig& cfg,
                                  HydroSource source);

/// Body wrench from a differential thruster pair. Commands clamp to [-1, 1]
/// before the curve lookup; positive yaw torque when the right thruster
/// pushes harder.
Wrench thruster_wrench(double cmd_left, double cmd_right,
                       const ThrusterModel& m);

/// Curve-level overload used by the batch environment so per-episode scales
/// need no model copy. Both overloads share this math.
Wrench thruster_wrench(double cmd_left, double cmd_right,
                       const ThrusterCurve& left, const ThrusterCurve& right,
                       double separation, double scale_left,
                       double scale_right);

// ---------------------------------------------------------------------------
// Environmental disturbance: constant offset plus one shared sinusoid,
// expressed in the world frame and rotated into the body each step.
// ---------------------------------------------------------------------------

struct DisturbanceState {
  double force_offset_x = 0, force_offset_y = 0;  // N, world frame
  double force_amp_x = 0, force_amp_y = 0;        // N
  double torque_offset = 0, torque_amp = 0;       // N m
  double omega = 0;                               // rad/s
  double phase = 0;                               // rad
};

Wrench disturbance_wrench(const DisturbanceState& d, double t, double psi);

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

/// One semi-implicit Euler step: velocities update from the applied wrench
/// plus damping at the current velocity, then the pose integrates with the
/// *new* velocities. `applied` excludes damping. Throws std::invalid_argument
/// on dt <= 0.
BodyState step(const BodyState& s, const Wrench& applied,
               const HydroParams& p, double dt);

// ---------------------------------------------------------------------------
// Hydrostatics
// ---------------------------------------------------------------------------

/// Draft at which buoyancy balances weight for a wall-sided hull. Throws
/// ConfigError when the hull would have to submerge past hull_height.
double equilibrium_draft(const HullConfig& hull);

// ---------------------------------------------------------------------------
// Open-loop test fixtures shared by the identification toolkit.
// ---------------------------------------------------------------------------

struct SteadyStateRun {
  double applied = 0;            // N or N m
  double steady_velocity = 0;    // m/s or rad/s, final trace sample
  bool converged = false;
  std::vector<double> t;         // s
  std::vector<double> velocity;  // full trace
};

/// Constant surge force from rest until (near) terminal velocity.
SteadyStateRun simulate_acceleration_test(const HydroParams& p,
                                          double force_n, double duration_s,
                                          double dt = kDefaultDt);

/// Constant yaw torque from rest.
SteadyStateRun simulate_rotation_test(const HydroParams& p,
                                      double torque_nm, double duration_s,
                                      double dt = kDefaultDt);

}  // namespace asv
