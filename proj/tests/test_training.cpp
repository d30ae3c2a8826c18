#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "asvlab/csv.hpp"
#include "asvlab/trainer.hpp"

#include "test_util.hpp"

using namespace asv;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Desk-sized run: small net, small batch, quick episodes.
RunConfig tiny_config(std::uint64_t seed) {
  RunConfig cfg;
  cfg.master_seed = seed;
  cfg.batch.n_envs = 8;
  cfg.ppo.batch_size = 8 * 16;
  cfg.ppo.hidden = 16;
  cfg.ppo.max_iterations = 4;
  cfg.ppo.checkpoint_interval = 2;
  return cfg;
}

// Short-episode shaping study: every episode ends within four iterations'
// worth of steps, so episode returns exist from the first few iterations.
RunConfig smoke_config(std::uint64_t seed) {
  RunConfig cfg;
  cfg.master_seed = seed;
  cfg.batch.n_envs = 32;
  cfg.ppo.batch_size = 32 * 64;
  cfg.ppo.hidden = 32;
  cfg.ppo.learning_rate = 3e-4;
  cfg.ppo.max_iterations = 200;
  cfg.ppo.checkpoint_interval = 200;
  cfg.env.max_steps = 256;
  cfg.env.goal_max_distance = 6.0;
  return cfg;
}

double window_mean(const std::vector<double>& v, int first_iter,
                   int last_iter) {
  double s = 0;
  int n = 0;
  for (int it = first_iter; it <= last_iter; ++it) {
    const double x = v[static_cast<std::size_t>(it - 1)];
    if (std::isfinite(x)) {
      s += x;
      ++n;
    }
  }
  REQUIRE(n > 0);
  return s / n;
}

double median3(std::vector<double> v) {
  REQUIRE(v.size() == 3);
  std::sort(v.begin(), v.end());
  return v[1];
}

}  // namespace

TEST_CASE("training writes its log, checkpoints, and resolved config") {
  TempDir tmp;
  TrainOptions opt;
  opt.variant = variant_from_name("SID-DR");
  opt.out_dir = tmp.path / "run";
  const RunConfig cfg = tiny_config(3);
  const TrainResult res = train_agent(cfg, opt);

  CHECK(res.iterations_run == 4);
  CHECK_FALSE(res.numerics_halt);
  CHECK(res.mean_step_reward.size() == 4);
  CHECK(res.entropy.size() == 4);
  CHECK(std::filesystem::exists(opt.out_dir / "config_resolved.cfg"));
  CHECK(std::filesystem::exists(opt.out_dir / "checkpoint_latest.ckpt"));
  CHECK(res.final_checkpoint == opt.out_dir / "policy_final.ckpt");

  const LoadedCheckpoint final_ckpt = load_checkpoint(res.final_checkpoint);
  require_dims(final_ckpt, kObsDim, kActDim);
  CHECK(final_ckpt.meta.iteration == 4);
  CHECK(final_ckpt.meta.config_hash == config_hash(cfg));
  CHECK(load_checkpoint(opt.out_dir / "checkpoint_latest.ckpt")
            .meta.iteration == 4);

  const CsvTable log = read_csv(opt.out_dir / "train_log.csv");
  CHECK(log.rows.size() == 4);
  CHECK(log.column("iteration") == 0);
  CHECK(log.column("entropy") >= 0);
  CHECK(log.rows[3][0] == 4.0);
  const int steps_col = log.column("env_steps");
  REQUIRE(steps_col >= 0);
  CHECK(log.rows[3][static_cast<std::size_t>(steps_col)] ==
        4.0 * cfg.ppo.batch_size);

  // The resolved config reloads to the same hash the checkpoint carries.
  const RunConfig round =
      load_run_config(opt.out_dir / "config_resolved.cfg");
  CHECK(config_hash(round) == final_ckpt.meta.config_hash);
}

TEST_CASE("training is deterministic and worker-count invariant") {
  TempDir tmp;
  auto run = [&](const char* name, std::uint64_t seed, int workers) {
    TrainOptions opt;
    opt.variant = variant_from_name("SID-DR");
    opt.out_dir = tmp.path / name;
    opt.workers = workers;
    RunConfig cfg = tiny_config(seed);
    train_agent(cfg, opt);
    return slurp(tmp.path / name / "policy_final.ckpt");
  };
  const std::string a = run("a", 11, 1);
  const std::string b = run("b", 11, 1);
  const std::string c = run("c", 11, 3);
  const std::string d = run("d", 12, 1);
  CHECK(a == b);
  CHECK(a == c);
  CHECK(a != d);
}

TEST_CASE("batch size must tile the env count") {
  TempDir tmp;
  RunConfig cfg = tiny_config(0);
  cfg.ppo.batch_size = 100;  // not a multiple of 8 envs
  TrainOptions opt;
  opt.variant = variant_from_name("SID");
  opt.out_dir = tmp.path / "bad";
  CHECK_THROWS_AS(train_agent(cfg, opt), ConfigError);
}

TEST_CASE("an unbuildable hull fails before any training work") {
  TempDir tmp;
  RunConfig cfg = tiny_config(0);
  cfg.hull.mass = 80.0;  // draft would exceed the hull height
  TrainOptions opt;
  opt.variant = variant_from_name("SID");
  opt.out_dir = tmp.path / "hull";
  CHECK_THROWS(train_agent(cfg, opt));
}

TEST_CASE("a non-finite loss halts training and rolls the policy back") {
  TempDir tmp;
  RunConfig cfg = tiny_config(7);
  // Degenerate shaping: capture fires on the very first step with an
  // astronomically large bonus, so advantage normalization goes non-finite.
  cfg.reward.d_threshold = 20.0;
  cfg.reward.lambda6 = 1e308;
  TrainOptions opt;
  opt.variant = variant_from_name("SID");
  opt.out_dir = tmp.path / "halt";
  std::ostringstream progress;
  opt.progress = &progress;

  const TrainResult res = train_agent(cfg, opt);
  CHECK(res.numerics_halt);
  CHECK(res.iterations_run == 1);
  CHECK(progress.str().find("stopping") != std::string::npos);

  // The saved policy is the pre-update one.
  SplitRng init_rng(cfg.master_seed, kStreamPolicyInit, 0);
  const Net fresh = Net::init(kObsDim, kActDim, cfg.ppo.hidden,
                              cfg.ppo.log_std_init, init_rng);
  const LoadedCheckpoint saved = load_checkpoint(res.final_checkpoint);
  REQUIRE(saved.net.theta.size() == fresh.theta.size());
  for (Eigen::Index k = 0; k < fresh.theta.size(); ++k)
    CHECK(saved.net.theta(k) ==
          static_cast<double>(static_cast<float>(fresh.theta(k))));
}

TEST_CASE("training improves the shaped reward on short episodes") {
  // Median improvement over 3 seeds between early (iters 6-15) and late
  // (iters 191-200) windows, on both the per-step reward and the episode
  // return. The shaping is dense, so a working learner separates the
  // windows with a wide margin.
  std::vector<double> step_gain, return_gain;
  for (std::uint64_t seed : {101, 202, 303}) {
    TempDir tmp;
    TrainOptions opt;
    opt.variant = variant_from_name("SID-DR");
    opt.out_dir = tmp.path / "smoke";
    const TrainResult res = train_agent(smoke_config(seed), opt);
    REQUIRE(res.iterations_run == 200);
    REQUIRE_FALSE(res.numerics_halt);
    step_gain.push_back(window_mean(res.mean_step_reward, 191, 200) -
                        window_mean(res.mean_step_reward, 6, 15));
    return_gain.push_back(window_mean(res.mean_episode_return, 191, 200) -
                          window_mean(res.mean_episode_return, 6, 15));
  }
  CHECK(median3(step_gain) > 0.0);
  CHECK(median3(return_gain) > 0.0);
}

TEST_CASE("a larger entropy bonus keeps the policy wider") {
  std::vector<double> gaps;
  for (std::uint64_t seed : {5, 6, 7}) {
    auto final_entropy = [&](double coeff) {
      TempDir tmp;
      RunConfig cfg = smoke_config(seed);
      cfg.ppo.max_iterations = 60;
      cfg.ppo.entropy_coeff = coeff;
      TrainOptions opt;
      opt.variant = variant_from_name("SID");
      opt.out_dir = tmp.path / "ent";
      const TrainResult res = train_agent(cfg, opt);
      return res.entropy.back();
    };
    gaps.push_back(final_entropy(0.05) - final_entropy(0.0));
  }
  CHECK(median3(gaps) >= 0.0);
}
