#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "asvlab/batch.hpp"
#include "asvlab/checkpoint.hpp"
#include "asvlab/csv.hpp"
#include "asvlab/eval.hpp"
#include "asvlab/sysid.hpp"
#include "asvlab/trainer.hpp"

namespace {

using namespace asv;

namespace fs = std::filesystem;

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::string workers = "";  // "", "auto", or a number
  std::uint64_t seed = 0;
  bool seed_set = false;
};

RunConfig load_config(const CommonOpts& c) {
  RunConfig cfg;
  if (!c.config_path.empty()) cfg = load_run_config(c.config_path);
  if (c.seed_set) cfg.master_seed = c.seed;
  if (!c.out_dir.empty()) cfg.out_dir = c.out_dir;
  return cfg;
}

int resolve_worker_request(const std::string& flag, int cfg_workers) {
  std::string v = flag;
  if (v.empty()) {
    const char* env = std::getenv("ASVLAB_WORKERS");
    if (env != nullptr) v = env;
  }
  if (v.empty()) return cfg_workers;
  if (v == "auto") return 0;
  try {
    std::size_t pos = 0;
    const int n = std::stoi(v, &pos);
    if (pos != v.size() || n < 0) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw ConfigError("workers must be a nonnegative integer or 'auto', got '" +
                      v + "'");
  }
}

void add_common(CLI::App* cmd, CommonOpts* c) {
  cmd->add_option("--config", c->config_path,
                  "Key-value config file (defaults describe the reference "
                  "vessel)");
  cmd->add_option("--out", c->out_dir, "Output directory (overrides config)");
  cmd->add_option("--workers", c->workers,
                  "Worker threads: a count or 'auto' (default: config, then "
                  "ASVLAB_WORKERS)");
  auto* seed =
      cmd->add_option("--seed", c->seed, "Master seed (overrides config)");
  seed->each([c](const std::string&) { c->seed_set = true; });
}

HydroParams pick_params(const RunConfig& cfg, const std::string& which) {
  if (which == "nominal") return make_hydro(cfg.hull, cfg.hydro_nominal);
  if (which == "identified")
    return make_hydro(cfg.hull, cfg.hydro_identified);
  throw ConfigError("--params must be nominal or identified, got '" + which +
                    "'");
}

// ---------------------------------------------------------------------------
// sysid
// ---------------------------------------------------------------------------

int cmd_sysid_synth(const CommonOpts& common, const std::string& params,
                    const std::string& axis, const std::string& levels_text,
                    double noise, double duration, int repeats, bool traces) {
  RunConfig cfg = load_config(common);
  const HydroParams hp = pick_params(cfg, params);
  if (axis != "surge" && axis != "yaw")
    throw ConfigError("--axis must be surge or yaw for the synthetic rig");

  SynthOptions opt;
  opt.velocity_noise = noise;
  opt.duration_s = duration;
  opt.repeats = repeats;
  opt.seed = cfg.master_seed;
  if (!levels_text.empty()) {
    std::stringstream ss(levels_text);
    std::string tok;
    while (std::getline(ss, tok, ','))
      opt.levels.push_back(std::stod(tok));
  }

  const SynthResult res = axis == "surge"
                              ? synth_acceleration_data(hp, opt)
                              : synth_rotation_data(hp, opt);
  for (double lvl : res.skipped_levels)
    std::cerr << "warning: level " << lvl
              << " did not reach steady state within " << opt.duration_s
              << " s; excluded\n";
  if (res.steady.empty())
    throw std::runtime_error("no level reached steady state");

  fs::create_directories(cfg.out_dir);
  const fs::path steady_path =
      fs::path(cfg.out_dir) / ("steady_" + axis + ".csv");
  std::vector<std::vector<double>> rows;
  for (const auto& s : res.steady) rows.push_back({s.applied, s.velocity});
  write_csv(steady_path, {"applied", "velocity"}, rows);
  std::cout << "wrote " << steady_path.string() << " (" << rows.size()
            << " levels)\n";

  if (traces) {
    int k = 0;
    for (const auto& run : res.runs) {
      char name[48];
      std::snprintf(name, sizeof(name), "trace_%s_%02d.csv", axis.c_str(),
                    k++);
      std::vector<std::vector<double>> trows;
      for (std::size_t i = 0; i < run.t.size(); ++i)
        trows.push_back({run.t[i], run.velocity[i]});
      write_csv(fs::path(cfg.out_dir) / name, {"t_s", "velocity"}, trows);
    }
    std::cout << "wrote " << k << " trace files\n";
  }
  return 0;
}

void write_overlay(const std::string& out_file, const std::string& key_lin,
                   const std::string& key_quad, double lin, double quad,
                   const std::string& provenance) {
  // Merge with an existing overlay so the per-axis fits can share a file.
  std::map<std::string, std::string> merged;
  std::vector<std::string> history;
  if (fs::exists(out_file)) {
    const KeyValueFile kv = parse_key_value_file(out_file);
    for (const auto& [section, kvs] : kv.sections) {
      if (section != "hydro")
        throw ConfigError(out_file + ": refusing to rewrite a non-overlay file");
      for (const auto& [k, v] : kvs) merged[k] = v.first;
    }
    std::ifstream in(out_file);
    std::string line;
    while (std::getline(in, line))
      if (line.rfind("# source:", 0) == 0) history.push_back(line);
  }
  merged[key_lin] = format_double(lin);
  merged[key_quad] = format_double(quad);
  std::ofstream out(out_file);
  if (!out) throw ConfigError("cannot write " + out_file);
  out << "# Damping coefficient overlay for 'train --hydro-file'.\n";
  for (const auto& h : history) out << h << "\n";
  out << "# source: " << provenance << "\n[hydro]\n";
  for (const auto& [k, v] : merged) out << k << " = " << v << "\n";
}

int cmd_sysid_fit_drag(const std::string& input, const std::string& axis,
                       const std::string& out_file) {
  static const std::map<std::string, std::pair<std::string, std::string>>
      kKeys = {{"surge", {"xu", "xuu"}},
               {"sway", {"yv", "yvv"}},
               {"yaw", {"nr", "nrr"}}};
  const auto keys = kKeys.find(axis);
  if (keys == kKeys.end())
    throw ConfigError("--axis must be surge, sway, or yaw");

  if (axis == "sway") {
    // The single-axis rig cannot excite sway, so there is nothing to fit;
    // emit the overdamped saturation values instead.
    const double clamp = 99.99;
    std::cerr << "warning: sway is not identifiable from steady-state rig "
                 "data; emitting the overdamped clamp "
              << clamp << " for yv and yvv\n";
    std::cout << "  yv  = " << clamp << "\n  yvv = " << clamp << "\n";
    if (!out_file.empty()) {
      write_overlay(out_file, "yv", "yvv", clamp, clamp,
                    "sway clamp (not identifiable)");
      std::cout << "wrote " << out_file << "\n";
    }
    return 0;
  }

  if (input.empty())
    throw ConfigError("--input is required for axis " + axis);
  const CsvTable t = read_csv(input, {"applied", "velocity"});
  std::vector<SteadyStateSample> samples;
  for (const auto& row : t.rows) samples.push_back({row[0], row[1]});
  const DragFit fit = fit_quadratic_drag(samples);

  std::cout << axis << " fit over " << samples.size() << " samples:\n"
            << "  " << keys->second.first << "  = " << format_double(fit.linear)
            << "\n"
            << "  " << keys->second.second << " = "
            << format_double(fit.quadratic) << "\n"
            << "  residual rms = " << format_double(fit.residual_rms) << "\n";

  if (!out_file.empty()) {
    write_overlay(out_file, keys->second.first, keys->second.second,
                  fit.linear, fit.quadratic,
                  input + " (" + axis + "), residual rms " +
                      format_double(fit.residual_rms));
    std::cout << "wrote " << out_file << "\n";
  }
  return 0;
}

int cmd_sysid_fit_thruster(const std::string& input,
                           const std::string& out_file) {
  const CsvTable t = read_csv(input, {"command", "force_n"});
  std::vector<BollardSample> samples;
  for (const auto& row : t.rows) samples.push_back({row[0], row[1]});
  const ThrusterCurve curve = fit_thruster_curve(samples);

  std::cout << "fitted " << curve.knots_command().size() << " knots:\n";
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < curve.knots_command().size(); ++i) {
    std::cout << "  " << format_double(curve.knots_command()[i]) << " -> "
              << format_double(curve.knots_force()[i]) << " N\n";
    rows.push_back({curve.knots_command()[i], curve.knots_force()[i]});
  }
  if (!out_file.empty()) {
    write_csv(out_file, {"command", "force_n"}, rows);
    std::cout << "wrote " << out_file << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

int cmd_train(const CommonOpts& common, const std::string& variant_name,
              const std::string& hydro_file) {
  RunConfig cfg = load_config(common);
  if (!hydro_file.empty()) apply_hydro_overlay(cfg, hydro_file);

  TrainOptions opt;
  opt.variant = variant_from_name(variant_name);
  opt.out_dir = cfg.out_dir;
  opt.workers = resolve_worker_request(common.workers, cfg.batch.workers);
  opt.progress = &std::cerr;

  const TrainResult res = train_agent(cfg, opt);
  std::cout << "final checkpoint: " << res.final_checkpoint.string() << "\n";
  if (res.numerics_halt) {
    std::cerr << "training halted on a non-finite loss at iteration "
              << res.iterations_run << "\n";
    return 2;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

std::vector<double> parse_distances(const std::string& list) {
  std::set<int> radii;
  std::stringstream ss(list);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    double d = 0;
    try {
      std::size_t pos = 0;
      d = std::stod(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("--distances: '" + tok + "' is not a number");
    }
    const int di = static_cast<int>(d);
    if (d != di || di < 3 || di > 9)
      throw ConfigError("--distances entries must be whole meters in 3..9, "
                        "got '" + tok + "'");
    radii.insert(di);
  }
  return {radii.begin(), radii.end()};
}

std::vector<int> goals_for_distances(const std::vector<double>& radii) {
  std::vector<int> goals;
  for (double r : radii)
    for (int b = 0; b < kGridBearings; ++b)
      goals.push_back((static_cast<int>(r) - 3) * kGridBearings + b);
  return goals;
}

int cmd_eval(const CommonOpts& common, const std::string& checkpoint_path,
             const std::string& variant_label, const std::string& distances,
             const std::string& disturbances, bool trajectories,
             double min_success, bool min_success_set,
             const std::string& hydro_file) {
  RunConfig cfg = load_config(common);
  if (!hydro_file.empty()) apply_hydro_overlay(cfg, hydro_file);

  const LoadedCheckpoint ckpt = load_checkpoint(checkpoint_path);
  require_dims(ckpt, kObsDim, kActDim);
  if (ckpt.meta.config_hash != config_hash(cfg))
    std::cerr << "note: checkpoint was trained under a different "
                 "configuration (hash mismatch)\n";

  bool dist_flag = cfg.eval.disturbances;
  if (!disturbances.empty()) {
    if (disturbances == "on")
      dist_flag = true;
    else if (disturbances == "off")
      dist_flag = false;
    else
      throw ConfigError("--disturbances must be on or off");
  }

  const WorldSpec world = make_eval_world(cfg, dist_flag);

  const std::vector<double> radii =
      distances.empty() ? std::vector<double>{} : parse_distances(distances);

  EvalOptions opt;
  opt.capture_tolerance = cfg.eval.capture_tolerance;
  opt.keep_trajectories = trajectories;
  opt.goal_indices = goals_for_distances(radii);
  opt.workers = resolve_worker_request(common.workers, cfg.batch.workers);
  opt.master_seed = cfg.master_seed;

  const Net& net = ckpt.net;
  PolicyFn policy = [&net](const Observation& o) -> std::array<double, 2> {
    const Eigen::MatrixXd a =
        deterministic_actions(net, o.vec().transpose());
    return {a(0, 0), a(0, 1)};
  };

  const GridEvalResult result =
      run_grid_eval(policy, world, cfg.env, cfg.reward, opt);

  fs::create_directories(cfg.out_dir);
  write_resolved_config(cfg, fs::path(cfg.out_dir) / "config_resolved.cfg");
  const auto rows = aggregate_by_distance(result, radii);
  write_aggregate_csv(fs::path(cfg.out_dir) / "aggregate.csv", variant_label,
                      rows);
  if (trajectories)
    export_trajectories(result, fs::path(cfg.out_dir) / "trajectories");

  for (const auto& r : rows)
    std::cout << "d=" << r.distance << " m  success " << r.success_rate
              << "  mean_tc(all) " << r.mean_tc_all << " s  mean_eacc(all) "
              << r.mean_eacc_all << "  n=" << r.n << "\n";
  std::cout << "overall success rate: " << result.success_rate << " over "
            << result.episodes.size() << " goals (tolerance "
            << opt.capture_tolerance << " m, disturbances "
            << (dist_flag ? "on" : "off") << ")\n";

  const double floor =
      min_success_set ? min_success : cfg.eval.min_success;
  if (result.success_rate < floor) {
    std::cerr << "success rate " << result.success_rate
              << " is below the required floor " << floor << "\n";
    return 2;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

int cmd_bench(const CommonOpts& common, int envs_override, double duration) {
  RunConfig cfg = load_config(common);
  if (envs_override > 0) cfg.batch.n_envs = envs_override;

  BatchSpec spec;
  spec.world = make_training_world(cfg, variant_from_name("SID-DR"));
  spec.env = cfg.env;
  spec.reward = cfg.reward;
  spec.n_envs = cfg.batch.n_envs;
  spec.master_seed = cfg.master_seed;

  const int workers =
      resolve_worker_request(common.workers, cfg.batch.workers);
  const BenchResult r = throughput_bench(spec, workers, duration);

  std::cout << "n_envs " << spec.n_envs << ", multi-worker pool "
            << r.workers_multi << " threads, >= " << duration
            << " s per measurement\n";
  std::printf("full env step, 1 worker   : %12.0f steps/s\n",
              r.env_steps_per_s_single);
  std::printf("full env step, %2d workers : %12.0f steps/s\n",
              r.workers_multi, r.env_steps_per_s_multi);
  std::printf("integrator only, 1 worker   : %12.0f steps/s\n",
              r.physics_steps_per_s_single);
  std::printf("integrator only, %2d workers : %12.0f steps/s\n",
              r.workers_multi, r.physics_steps_per_s_multi);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planar twin-thruster vessel lab: simulation, "
               "identification, PPO training, grid evaluation"};
  app.require_subcommand(1);

  // sysid
  auto* sysid = app.add_subcommand("sysid", "Identification toolkit");
  sysid->require_subcommand(1);

  CommonOpts synth_common;
  std::string synth_params = "identified", synth_axis = "surge";
  std::string synth_levels;
  double synth_noise = 0.0, synth_duration = 180.0;
  int synth_repeats = SynthOptions{}.repeats;
  bool synth_traces = false;
  auto* synth = sysid->add_subcommand(
      "synth", "Generate steady-state datasets from a known model");
  add_common(synth, &synth_common);
  synth->add_option("--params", synth_params, "nominal or identified");
  synth->add_option("--axis", synth_axis, "surge or yaw");
  synth->add_option("--levels", synth_levels,
                    "Comma-separated applied forces/torques");
  synth->add_option("--noise", synth_noise,
                    "Multiplicative velocity noise amplitude");
  synth->add_option("--duration", synth_duration, "Run length per level, s");
  synth->add_option("--repeats", synth_repeats,
                    "Noisy readings averaged per level");
  synth->add_flag("--traces", synth_traces, "Also write full time series");

  std::string fd_input, fd_axis = "surge", fd_out;
  auto* fit_drag = sysid->add_subcommand(
      "fit-drag", "Fit linear+quadratic damping from steady states");
  fit_drag->add_option("--input", fd_input,
                       "CSV: applied,velocity (unused for --axis sway)");
  fit_drag->add_option("--axis", fd_axis, "surge, sway, or yaw");
  fit_drag->add_option("--out", fd_out, "Coefficient overlay file to write");

  std::string ft_input, ft_out;
  auto* fit_thruster = sysid->add_subcommand(
      "fit-thruster", "Fit a monotone thruster curve from bollard pulls");
  fit_thruster->add_option("--input", ft_input, "CSV: command,force_n")
      ->required();
  fit_thruster->add_option("--out", ft_out, "Fitted curve CSV to write");

  // train
  CommonOpts train_common;
  std::string train_variant = "SID-DR", train_hydro;
  auto* train = app.add_subcommand("train", "PPO training");
  add_common(train, &train_common);
  train->add_option("--variant", train_variant, "NV, NV-DR, SID, or SID-DR");
  train->add_option("--hydro-file", train_hydro,
                    "Coefficient overlay from sysid fit-drag");

  // eval
  CommonOpts eval_common;
  std::string eval_ckpt, eval_variant = "agent", eval_distances;
  std::string eval_disturbances, eval_hydro;
  bool eval_traj = false;
  double eval_floor = 0.0;
  auto* eval = app.add_subcommand("eval", "Goal-grid evaluation");
  add_common(eval, &eval_common);
  eval->add_option("--checkpoint", eval_ckpt, "Policy checkpoint")
      ->required();
  eval->add_option("--variant", eval_variant,
                   "Label for the aggregate CSV rows");
  eval->add_option("--distances", eval_distances,
                   "Comma-separated goal radii (default: full grid)");
  eval->add_option("--disturbances", eval_disturbances, "on or off");
  eval->add_flag("--trajectories", eval_traj, "Export per-goal trajectories");
  auto* floor_opt = eval->add_option("--min-success", eval_floor,
                                     "Exit nonzero below this success rate");
  eval->add_option("--hydro-file", eval_hydro,
                   "Coefficient overlay from sysid fit-drag");

  // bench
  CommonOpts bench_common;
  int bench_envs = 0;
  double bench_duration = 2.0;
  auto* bench = app.add_subcommand("bench", "Throughput measurement");
  add_common(bench, &bench_common);
  bench->add_option("--envs", bench_envs, "Override [batch] n_envs");
  bench->add_option("--duration", bench_duration,
                    "Minimum seconds per measurement");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (synth->parsed())
      return cmd_sysid_synth(synth_common, synth_params, synth_axis,
                             synth_levels, synth_noise, synth_duration,
                             synth_repeats, synth_traces);
    if (fit_drag->parsed())
      return cmd_sysid_fit_drag(fd_input, fd_axis, fd_out);
    if (fit_thruster->parsed())
      return cmd_sysid_fit_thruster(ft_input, ft_out);
    if (train->parsed())
      return cmd_train(train_common, train_variant, train_hydro);
    if (eval->parsed())
      return cmd_eval(eval_common, eval_ckpt, eval_variant, eval_distances,
                      eval_disturbances, eval_traj, eval_floor,
                      floor_opt->count() > 0, eval_hydro);
    if (bench->parsed())
      return cmd_bench(bench_common, bench_envs, bench_duration);
    std::cerr << "no command given\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const CsvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}
