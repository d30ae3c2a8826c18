#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "asvlab/common.hpp"

namespace asv {

// ---------------------------------------------------------------------------
// Parameter structs. Defaults describe the reference vessel; every field can
// be overridden from the config file.
// ---------------------------------------------------------------------------

struct HullConfig {
  double mass = 35.96;              // kg
  double length = 1.35;             // m
  double width = 0.98;              // m
  double iz = 8.34;                 // kg m^2, yaw inertia about CoG
  double water_density = 1000.0;    // kg/m^3
  double waterplane_area = 0.24;    // m^2, assumed constant over draft
  double hull_height = 0.30;        // m, max admissible draft
  double added_mass_u = 0.0;        // kg
  double added_mass_v = 0.0;        // kg
  double added_mass_r = 0.0;        // kg m^2
};

/// Rigid-body + damping parameters consumed by the dynamics step.
struct HydroParams {
  double mass = 35.96;
  double iz = 8.34;
  double added_mass_u = 0.0;
  double added_mass_v = 0.0;
  double added_mass_r = 0.0;
  double xu = 0.0;   // linear surge damping, N s/m
  double yv = 0.0;   // linear sway damping, N s/m
  double nr = 0.0;   // linear yaw damping, N m s/rad
  double xuu = 0.0;  // quadratic surge damping, N s^2/m^2
  double yvv = 0.0;  // quadratic sway damping, N s^2/m^2
  double nrr = 0.0;  // quadratic yaw damping, N m s^2/rad^2
};

/// Damping-only coefficient set as stored in the config file; merged with the
/// hull to make a full HydroParams.
struct DampingCoeffs {
  double xu = 0.0, yv = 0.0, nr = 0.0;
  double xuu = 0.0, yvv = 0.0, nrr = 0.0;
};

DampingCoeffs nominal_damping();     // CFD-derived baseline
DampingCoeffs identified_damping();  // bench-identified baseline
HydroParams make_hydro(const HullConfig& hull, const DampingCoeffs& d);

struct RewardParams {
  double lambda1 = 1.0;    // distance progress
  double lambda2 = 0.02;   // heading alignment
  double lambda3 = 0.01;   // energy penalty
  double lambda4 = 1.0;    // yaw-rate change penalty
  double lambda5 = -0.2;   // per-step time penalty
  double lambda6 = 30.0;   // capture bonus
  double k1 = -10.0;
  double k2 = -0.1;
  double k3 = 1.0;
  double k4 = -0.33;
  double d_threshold = 0.1;  // m
};

struct RandomizationConfig {
  double pos_noise = 0.03;          // m, uniform on observed goal position
  double heading_noise = 0.025;     // rad, uniform on observed heading error
  double drag_jitter = 0.10;        // +-fraction on every damping coefficient
  double thrust_scale_low = 0.5;    // per-thruster force scale, U(low, high)
  double thrust_scale_high = 1.0;
  double force_offset_max = 2.5;    // N, per world axis
  double force_amp_max = 2.5;       // N, sinusoidal amplitude per world axis
  double torque_offset_max = 1.0;   // N m
  double torque_amp_max = 1.0;      // N m
  double dist_freq_low = 0.1;       // rad/s, shared sinusoid frequency
  double dist_freq_high = 1.0;
  double action_noise = 0.02;       // additive uniform on commands
  bool obs_noise = true;
  bool drag_randomization = true;
  bool disturbances = true;
};

struct EnvConfig {
  double dt = kDefaultDt;
  int max_steps = 3000;            // 60 s
  double runaway_distance = 15.0;  // m
  double goal_min_distance = 1.5;  // m, training goal sampling
  double goal_max_distance = 10.0;
  double goal_bearing_max = kPi / 4.0;  // rad, +- range
};

struct PpoConfig {
  int hidden = 128;
  double log_std_init = 0.0;
  double learning_rate = 1e-4;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  int epochs_per_batch = 4;
  int minibatch_count = 4;
  // Zero: with a learned state-independent sigma, any positive bonus props
  // the noise up and the deterministic mean never takes over the driving.
  double entropy_coeff = 0.0;
  double value_coeff = 0.5;
  double grad_clip_norm = 1.0;
  int batch_size = 16384;  // transitions per update; horizon = batch/envs
  int max_iterations = 1000;
  int checkpoint_interval = 100;
};

struct BatchConfig {
  int n_envs = 1024;
  int workers = 0;  // 0 = auto (hardware concurrency)
};

struct EvalConfig {
  double capture_tolerance = 0.3;  // m
  bool disturbances = false;
  double min_success = 0.0;  // CI floor; eval exits nonzero below this
};

/// Piecewise-linear thruster response, force as a function of command.
struct ThrusterCurvePoints {
  std::vector<double> command;  // strictly increasing, brackets 0
  std::vector<double> force;    // N, nondecreasing, force at command 0 is 0
};

struct ThrusterConfig {
  double separation = 0.76;     // m between thruster lines of action
  double force_forward = 25.0;  // N at command +1, nominal curve
  double force_reverse = 12.5;  // N magnitude at command -1, nominal curve
  // Identified per-thruster curves; empty = use the nominal shape.
  ThrusterCurvePoints identified_left;
  ThrusterCurvePoints identified_right;
};

struct RunConfig {
  std::uint64_t master_seed = 0;
  std::string out_dir = "out";
  HullConfig hull;
  DampingCoeffs hydro_nominal = nominal_damping();
  DampingCoeffs hydro_identified = identified_damping();
  ThrusterConfig thruster;
  RewardParams reward;
  RandomizationConfig randomization;
  EnvConfig env;
  PpoConfig ppo;
  BatchConfig batch;
  EvalConfig eval;
};

// ---------------------------------------------------------------------------
// Key-value config file: '[section]' headers, 'key = value' lines, '#'
// comments. Unknown sections or keys are errors, not warnings; a typo must
// never silently run with defaults.
// ---------------------------------------------------------------------------

struct KeyValueFile {
  // section -> key -> (value, line number)
  std::map<std::string, std::map<std::string, std::pair<std::string, int>>>
      sections;
  std::string path;

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;
};

KeyValueFile parse_key_value_file(const std::filesystem::path& path);

/// Load a full run configuration. Missing keys keep their defaults; unknown
/// keys throw ConfigError with file/line context. Validation (positive
/// masses, sane ranges, divisibility constraints) happens here too.
RunConfig load_run_config(const std::filesystem::path& path);

/// Parse config text that is already in memory (used by tests).
RunConfig parse_run_config(const KeyValueFile& kv);

void validate(const RunConfig& cfg);

/// Write the fully-resolved configuration, defaults included, so a run
/// directory is self-describing.
void write_resolved_config(const RunConfig& cfg,
                           const std::filesystem::path& path);

/// Overlay a fitted `[hydro]` coefficient file (output of the sysid tool)
/// onto the identified coefficient set.
void apply_hydro_overlay(RunConfig& cfg, const std::filesystem::path& path);

/// FNV-1a over the resolved config text; stamped into checkpoints so a
/// checkpoint can be matched to the settings that produced it.
std::uint64_t config_hash(const RunConfig& cfg);

// ---------------------------------------------------------------------------
// Agent variants: which damping set the training world uses and how much
// thrust randomization training sees.
// ---------------------------------------------------------------------------

enum class HydroSource { kNominal, kIdentified };

struct AgentVariant {
  std::string name;
  HydroSource hydro_source = HydroSource::kNominal;
  double thrust_randomization = 0.0;  // fraction f: scale ~ U(1-f, 1)
};

/// NV, NV-DR, SID, SID-DR. Throws ConfigError on anything else.
AgentVariant variant_from_name(const std::string& name);

}  // namespace asv
