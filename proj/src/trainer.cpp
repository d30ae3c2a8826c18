#include "asvlab/trainer.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>

#include "asvlab/csv.hpp"

namespace asv {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct EpisodeWindow {
  std::deque<std::uint8_t> outcomes;  // success flags, most recent last
  static constexpr std::size_t kCap = 200;

  void push(bool success) {
    outcomes.push_back(success ? 1 : 0);
    if (outcomes.size() > kCap) outcomes.pop_front();
  }
  double rate() const {
    if (outcomes.empty()) return 0.0;
    double s = 0;
    for (auto o : outcomes) s += o;
    return s / static_cast<double>(outcomes.size());
  }
};

}  // namespace

TrainResult train_agent(const RunConfig& cfg, const TrainOptions& opt) {
  const int n_envs = cfg.batch.n_envs;
  if (cfg.ppo.batch_size % n_envs != 0)
    throw ConfigError("batch_size " + std::to_string(cfg.ppo.batch_size) +
                      " is not a multiple of n_envs " +
                      std::to_string(n_envs));
  const int horizon = cfg.ppo.batch_size / n_envs;

  equilibrium_draft(cfg.hull);  // fail fast on an unbuildable hull

  std::filesystem::create_directories(opt.out_dir);
  write_resolved_config(cfg, opt.out_dir / "config_resolved.cfg");
  const std::uint64_t cfg_hash = config_hash(cfg);

  BatchSpec spec;
  spec.world = make_training_world(cfg, opt.variant);
  spec.env = cfg.env;
  spec.reward = cfg.reward;
  spec.n_envs = n_envs;
  spec.master_seed = cfg.master_seed;

  std::unique_ptr<WorkerPool> pool;
  const int workers = WorkerPool::resolve_workers(opt.workers);
  if (workers > 1) pool = std::make_unique<WorkerPool>(workers);
  BatchEnv env(spec, pool.get());

  SplitRng init_rng(cfg.master_seed, kStreamPolicyInit, 0);
  Net net = Net::init(kObsDim, kActDim, cfg.ppo.hidden,
                      cfg.ppo.log_std_init, init_rng);
  SplitRng action_rng(cfg.master_seed, kStreamAction, 0);
  SplitRng shuffle_rng(cfg.master_seed, kStreamShuffle, 0);
  Adam adam(net.theta.size(), cfg.ppo.learning_rate);

  RolloutBuffer buf;
  buf.allocate(horizon, n_envs, kObsDim, kActDim);

  std::ofstream log(opt.out_dir / "train_log.csv");
  if (!log)
    throw ConfigError("cannot write train_log.csv in " +
                      opt.out_dir.string());
  log << "iteration,env_steps,mean_step_reward,episodes,"
         "mean_episode_return,success_rate,policy_loss,value_loss,entropy,"
         "approx_kl,clip_fraction,grad_norm\n";

  TrainResult result;
  Eigen::VectorXd episode_return_acc = Eigen::VectorXd::Zero(n_envs);
  EpisodeWindow window;
  Eigen::MatrixXd obs_now = env.obs();
  Eigen::VectorXd theta_backup;

  auto save_ckpt = [&](const std::string& name, int iteration) {
    const auto path = opt.out_dir / name;
    save_checkpoint(net, {cfg_hash, iteration}, path);
    return path;
  };

  int iter = 0;
  for (iter = 1; iter <= cfg.ppo.max_iterations; ++iter) {
    double reward_sum = 0;
    double finished_return_sum = 0;
    int finished = 0;

    for (int t = 0; t < horizon; ++t) {
      const PolicySample sample = sample_actions(net, obs_now, action_rng);
      const Eigen::Index row0 = static_cast<Eigen::Index>(t) * n_envs;
      buf.obs.middleRows(row0, n_envs) = obs_now;
      buf.z.middleRows(row0, n_envs) = sample.z;
      buf.logp.segment(row0, n_envs) = sample.logp;
      buf.values.row(t) = sample.value.transpose();

      env.step(sample.action);
      const auto& done = env.done();
      const auto& success = env.success();
      const auto& truncated = env.truncated();

      for (int i = 0; i < n_envs; ++i) {
        const double rew = env.rewards()(i);
        buf.rewards(t, i) = rew;
        buf.done(t, i) = done[i];
        buf.truncated(t, i) = truncated[i];
        reward_sum += rew;
        episode_return_acc(i) += rew;
        if (done[i]) {
          finished_return_sum += episode_return_acc(i);
          episode_return_acc(i) = 0.0;
          ++finished;
          window.push(success[i] != 0);
        }
      }

      // Values of truncated final states, needed for bootstrapping.
      std::vector<int> trunc_rows;
      for (int i = 0; i < n_envs; ++i)
        if (truncated[i]) trunc_rows.push_back(i);
      if (!trunc_rows.empty()) {
        Eigen::MatrixXd fin(static_cast<Eigen::Index>(trunc_rows.size()),
                            kObsDim);
        for (std::size_t k = 0; k < trunc_rows.size(); ++k)
          fin.row(static_cast<Eigen::Index>(k)) =
              env.final_obs().row(trunc_rows[k]);
        const Eigen::VectorXd v = values_of(net, fin);
        for (std::size_t k = 0; k < trunc_rows.size(); ++k)
          buf.trunc_value(t, trunc_rows[k]) = v(static_cast<Eigen::Index>(k));
      }

      obs_now = env.obs();
    }
    buf.last_value = values_of(net, obs_now);
    compute_gae(buf, cfg.ppo.gamma, cfg.ppo.gae_lambda);

    theta_backup = net.theta;
    PpoStats stats;
    bool halted = false;
    try {
      stats = ppo_update(net, adam, buf, cfg.ppo, shuffle_rng);
    } catch (const NumericsError& e) {
      net.theta = theta_backup;
      halted = true;
      if (opt.progress)
        *opt.progress << "[" << opt.variant.name << "] stopping at iteration "
                      << iter << ": " << e.what() << "\n";
    }

    const double mean_step_reward =
        reward_sum / static_cast<double>(horizon * n_envs);
    const double mean_ep_return =
        finished > 0 ? finished_return_sum / finished : kNan;
    result.mean_step_reward.push_back(mean_step_reward);
    result.mean_episode_return.push_back(mean_ep_return);
    result.success_rate.push_back(window.rate());
    result.entropy.push_back(stats.entropy);

    log << iter << "," << static_cast<long long>(iter) * cfg.ppo.batch_size
        << "," << format_double(mean_step_reward) << "," << finished << ","
        << format_double(mean_ep_return) << ","
        << format_double(window.rate()) << ","
        << format_double(stats.policy_loss) << ","
        << format_double(stats.value_loss) << ","
        << format_double(stats.entropy) << ","
        << format_double(stats.approx_kl) << ","
        << format_double(stats.clip_fraction) << ","
        << format_double(stats.grad_norm) << "\n";

    if (opt.progress && (iter % opt.progress_every == 0 || halted))
      *opt.progress << "[" << opt.variant.name << "] iter " << iter << "/"
                    << cfg.ppo.max_iterations << " reward/step "
                    << mean_step_reward << " success " << window.rate()
                    << " kl " << stats.approx_kl << "\n";

    if (halted) {
      result.numerics_halt = true;
      break;
    }
    if (iter % cfg.ppo.checkpoint_interval == 0)
      save_ckpt("checkpoint_latest.ckpt", iter);
  }
  result.iterations_run = std::min(iter, cfg.ppo.max_iterations);
  result.final_checkpoint = save_ckpt("policy_final.ckpt",
                                      result.iterations_run);
  log.flush();
  return result;
}

}  // namespace asv
