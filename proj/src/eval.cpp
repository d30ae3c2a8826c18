#include "asvlab/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>

#include "asvlab/csv.hpp"

namespace asv {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

EpisodeMetrics run_episode(const PolicyFn& policy, const WorldSpec& world,
                           const EnvConfig& env_cfg, const RewardParams& rp,
                           int goal_index, const EvalOptions& opt) {
  EpisodeState st = reset_episode(opt.master_seed,
                                  static_cast<std::uint64_t>(goal_index), 0,
                                  world, env_cfg, goal_index);
  Observation obs = episode_obs(st, world);

  EpisodeMetrics m;
  m.goal_index = goal_index;
  m.goal = st.goal;
  m.trajectory.reserve(static_cast<std::size_t>(env_cfg.max_steps) + 1);

  auto record = [&](double al, double ar) {
    double d = 0, delta = 0;
    relative_goal(st.body, st.goal, &d, &delta);
    m.trajectory.push_back({st.t_step * env_cfg.dt, st.body.x, st.body.y,
                            st.body.psi, st.body.u, st.body.v, st.body.r, d,
                            al, ar});
    return d;
  };

  bool captured = false;
  while (true) {
    const std::array<double, 2> a = policy(obs);
    record(a[0], a[1]);
    const StepResult res = env_step(st, a, world, env_cfg, rp);
    m.e_acc += std::abs(a[0]) + std::abs(a[1]);
    obs = res.obs;

    if (!captured) {
      double d = 0, delta = 0;
      relative_goal(st.body, st.goal, &d, &delta);
      if (d < opt.capture_tolerance && std::abs(delta) < kPi / 2.0) {
        captured = true;
        m.success = true;
        m.t_capture = st.t_step * env_cfg.dt;
        if (opt.stop_on_capture) {
          record(0.0, 0.0);
          break;
        }
      }
    }
    if (res.done) {
      record(0.0, 0.0);
      break;
    }
  }

  m.steps = st.t_step;
  m.final_distance = m.trajectory.back().d;
  if (!m.success) m.t_capture = st.t_step * env_cfg.dt;
  if (!opt.keep_trajectories) {
    m.trajectory.clear();
    m.trajectory.shrink_to_fit();
  }
  return m;
}

}  // namespace

double accumulate_energy(
    const std::vector<std::array<double, 2>>& commands) {
  double e = 0;
  for (const auto& c : commands) e += std::abs(c[0]) + std::abs(c[1]);
  return e;
}

int detect_capture(const std::vector<TrajectoryPoint>& traj,
                   const GoalSpec& goal, double tolerance) {
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const TrajectoryPoint& p = traj[k];
    const double delta =
        wrap_angle(std::atan2(goal.y - p.y, goal.x - p.x) - p.psi);
    if (p.d < tolerance && std::abs(delta) < kPi / 2.0)
      return static_cast<int>(k);
  }
  return -1;
}

GridEvalResult run_grid_eval(const PolicyFn& policy, const WorldSpec& world,
                             const EnvConfig& env_cfg,
                             const RewardParams& reward_params,
                             const EvalOptions& opt) {
  std::vector<int> goals = opt.goal_indices;
  if (goals.empty()) {
    goals.resize(kGridGoals);
    for (int i = 0; i < kGridGoals; ++i) goals[static_cast<std::size_t>(i)] = i;
  }
  for (int g : goals)
    if (g < 0 || g >= kGridGoals)
      throw std::invalid_argument("goal index out of range: " +
                                  std::to_string(g));

  GridEvalResult out;
  out.episodes.resize(goals.size());

  auto body = [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t k = b; k < e; ++k)
      out.episodes[static_cast<std::size_t>(k)] =
          run_episode(policy, world, env_cfg, reward_params,
                      goals[static_cast<std::size_t>(k)], opt);
  };
  const int workers = WorkerPool::resolve_workers(opt.workers);
  if (workers > 1 && goals.size() > 1) {
    WorkerPool pool(workers);
    pool.parallel_for(static_cast<std::int64_t>(goals.size()), body);
  } else {
    body(0, static_cast<std::int64_t>(goals.size()));
  }

  int successes = 0;
  for (const auto& ep : out.episodes) successes += ep.success ? 1 : 0;
  out.success_rate =
      out.episodes.empty()
          ? 0.0
          : static_cast<double>(successes) /
                static_cast<double>(out.episodes.size());
  return out;
}

std::vector<AggregateRow> aggregate_by_distance(
    const GridEvalResult& result, const std::vector<double>& distances) {
  auto radius_of = [](const EpisodeMetrics& ep) {
    return 3.0 + ep.goal_index / kGridBearings;
  };
  // Default buckets mirror the reporting layout: near / mid / far radii.
  std::vector<double> buckets =
      distances.empty() ? std::vector<double>{3.0, 6.0, 9.0} : distances;

  std::vector<AggregateRow> rows;
  for (double b : buckets) {
    AggregateRow row;
    row.distance = b;
    double tc_s = 0, ea_s = 0, tc_all = 0, ea_all = 0;
    int n_success = 0;
    for (const auto& ep : result.episodes) {
      if (radius_of(ep) != b) continue;
      ++row.n;
      tc_all += ep.t_capture;
      ea_all += ep.e_acc;
      if (ep.success) {
        ++n_success;
        tc_s += ep.t_capture;
        ea_s += ep.e_acc;
      }
    }
    if (row.n == 0) continue;
    row.success_rate = static_cast<double>(n_success) / row.n;
    row.mean_tc_success = n_success ? tc_s / n_success : kNan;
    row.mean_eacc_success = n_success ? ea_s / n_success : kNan;
    row.mean_tc_all = tc_all / row.n;
    row.mean_eacc_all = ea_all / row.n;
    rows.push_back(row);
  }
  return rows;
}

void write_aggregate_csv(const std::filesystem::path& path,
                         const std::string& variant,
                         const std::vector<AggregateRow>& rows) {
  std::ofstream out(path);
  if (!out)
    throw CsvError("cannot write " + path.string());
  out << "variant,distance_bucket,mean_tc_s,mean_eacc,success_rate,n,"
         "mean_tc_all_s,mean_eacc_all\n";
  for (const auto& r : rows) {
    out << variant << "," << format_double(r.distance) << ","
        << format_double(r.mean_tc_success) << ","
        << format_double(r.mean_eacc_success) << ","
        << format_double(r.success_rate) << "," << r.n << ","
        << format_double(r.mean_tc_all) << ","
        << format_double(r.mean_eacc_all) << "\n";
  }
  if (!out.flush())
    throw CsvError("short write to " + path.string());
}

void export_trajectories(const GridEvalResult& result,
                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::vector<double>> manifest;
  for (const auto& ep : result.episodes) {
    if (ep.trajectory.empty())
      throw std::invalid_argument(
          "export_trajectories: trajectories were not kept; evaluate with "
          "keep_trajectories");
    char name[32];
    std::snprintf(name, sizeof(name), "goal_%03d.csv", ep.goal_index);
    std::vector<std::vector<double>> rows;
    rows.reserve(ep.trajectory.size());
    for (const auto& p : ep.trajectory)
      rows.push_back({p.t, p.x, p.y, p.psi, p.u, p.v, p.r, p.d, p.a_left,
                      p.a_right});
    write_csv(dir / name,
              {"t_s", "x", "y", "psi", "u", "v", "r", "d", "a_l", "a_r"},
              rows);
    manifest.push_back({static_cast<double>(ep.goal_index), ep.goal.x,
                        ep.goal.y, 3.0 + ep.goal_index / kGridBearings,
                        -45.0 + 5.0 * (ep.goal_index % kGridBearings),
                        ep.success ? 1.0 : 0.0, ep.t_capture, ep.e_acc,
                        static_cast<double>(ep.steps), ep.final_distance});
  }
  write_csv(dir / "manifest.csv",
            {"goal_index", "goal_x", "goal_y", "distance", "bearing_deg",
             "success", "t_c_s", "e_acc", "steps", "final_d"},
            manifest);
}

}  // namespace asv
