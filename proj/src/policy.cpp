#include "asvlab/policy.hpp"

#include <cmath>

namespace asv {

namespace {

inline double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// log(1 - tanh^2(z)), stable for large |z|.
inline double log1m_tanh2(double z) {
  static const double kLog2 = std::log(2.0);
  return 2.0 * (kLog2 - z - softplus(-2.0 * z));
}

const double kLog2Pi = std::log(2.0 * kPi);

}  // namespace

Eigen::VectorXd squashed_logp(const Eigen::Ref<const Eigen::MatrixXd>& z,
                              const Eigen::Ref<const Eigen::MatrixXd>& mean,
                              const Eigen::Ref<const Eigen::VectorXd>& s) {
  const Eigen::Index n = z.rows(), act = z.cols();
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double lp = -0.5 * static_cast<double>(act) * kLog2Pi;
    for (Eigen::Index j = 0; j < act; ++j) {
      const double sj = s(j);
      const double t = (z(i, j) - mean(i, j)) * std::exp(-sj);
      lp += -0.5 * t * t - sj - log1m_tanh2(z(i, j));
    }
    out(i) = lp;
  }
  return out;
}

PolicySample sample_actions(const Net& net,
                            const Eigen::Ref<const Eigen::MatrixXd>& obs,
                            SplitRng& rng) {
  Net::Cache cache;
  net.forward(obs, cache);
  const Eigen::Index n = obs.rows(), act = net.act_dim();
  PolicySample out;
  out.z.resize(n, act);
  const Eigen::VectorXd sigma = net.log_std().array().exp().matrix();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < act; ++j)
      out.z(i, j) = cache.mean(i, j) + sigma(j) * rng.normal();
  out.action = out.z.array().tanh().matrix();
  out.logp = squashed_logp(out.z, cache.mean, net.log_std());
  out.value = cache.value;
  return out;
}

Eigen::MatrixXd deterministic_actions(
    const Net& net, const Eigen::Ref<const Eigen::MatrixXd>& obs) {
  Net::Cache cache;
  net.forward(obs, cache);
  return cache.mean.array().tanh().matrix();
}

Eigen::VectorXd values_of(const Net& net,
                          const Eigen::Ref<const Eigen::MatrixXd>& obs) {
  Net::Cache cache;
  net.forward(obs, cache);
  return cache.value;
}

void RolloutBuffer::allocate(int horizon_steps, int envs, int obs_dim,
                             int act_dim) {
  horizon = horizon_steps;
  n_envs = envs;
  const Eigen::Index rows =
      static_cast<Eigen::Index>(horizon) * static_cast<Eigen::Index>(envs);
  obs.setZero(rows, obs_dim);
  z.setZero(rows, act_dim);
  logp.setZero(rows);
  rewards.setZero(horizon, envs);
  values.setZero(horizon, envs);
  done.setZero(horizon, envs);
  truncated.setZero(horizon, envs);
  trunc_value.setZero(horizon, envs);
  last_value.setZero(envs);
  advantages.setZero(rows);
  returns.setZero(rows);
}

void compute_gae(RolloutBuffer& buf, double gamma, double lambda) {
  const int T = buf.horizon, N = buf.n_envs;
  if (T < 1 || N < 1)
    throw std::invalid_argument("compute_gae: empty buffer");
  if (buf.rewards.rows() != T || buf.values.rows() != T ||
      buf.done.rows() != T || buf.truncated.rows() != T ||
      buf.trunc_value.rows() != T || buf.last_value.size() != N)
    throw std::invalid_argument("compute_gae: inconsistent buffer shapes");

  for (int i = 0; i < N; ++i) {
    double carry = 0.0;
    for (int t = T - 1; t >= 0; --t) {
      double next_value;
      if (buf.done(t, i)) {
        // Episode ends here: either a true terminal (bootstrap 0) or a
        // truncation (bootstrap the recorded value of the final state).
        next_value = buf.truncated(t, i) ? buf.trunc_value(t, i) : 0.0;
        carry = 0.0;
      } else {
        next_value = t + 1 < T ? buf.values(t + 1, i) : buf.last_value(i);
      }
      const double delta =
          buf.rewards(t, i) + gamma * next_value - buf.values(t, i);
      carry = delta + gamma * lambda * carry;
      const Eigen::Index row =
          static_cast<Eigen::Index>(t) * N + i;
      buf.advantages(row) = carry;
      buf.returns(row) = carry + buf.values(t, i);
    }
  }
}

Adam::Adam(Eigen::Index n, double lr, double beta1, double beta2, double eps)
    : m_(Eigen::VectorXd::Zero(n)),
      v_(Eigen::VectorXd::Zero(n)),
      lr_(lr),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {}

void Adam::step(Eigen::VectorXd& theta,
                const Eigen::Ref<const Eigen::VectorXd>& grad) {
  if (theta.size() != m_.size() || grad.size() != m_.size())
    throw std::invalid_argument("Adam::step: size mismatch");
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = (beta2_ * v_.array() + (1.0 - beta2_) * grad.array().square())
           .matrix();
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  theta.array() -= lr_ * (m_.array() / bc1) /
                   ((v_.array() / bc2).sqrt() + eps_);
}

double clip_global_norm(Eigen::VectorXd& g, double max_norm) {
  const double norm = g.norm();
  if (norm > max_norm && norm > 0.0) g *= max_norm / norm;
  return norm;
}

double ppo_loss(const Net& net, const Eigen::Ref<const Eigen::MatrixXd>& obs,
                const Eigen::Ref<const Eigen::MatrixXd>& z,
                const Eigen::Ref<const Eigen::VectorXd>& logp_old,
                const Eigen::Ref<const Eigen::VectorXd>& adv,
                const Eigen::Ref<const Eigen::VectorXd>& ret,
                const PpoConfig& cfg, Net* grad, PpoStats* stats) {
  const Eigen::Index n = obs.rows();
  const Eigen::Index act = net.act_dim();
  if (n == 0) throw std::invalid_argument("ppo_loss: empty minibatch");

  Net::Cache cache;
  net.forward(obs, cache);
  const Eigen::VectorXd s = net.log_std();
  const Eigen::VectorXd inv_var =
      (-2.0 * s.array()).exp().matrix();  // 1/sigma^2

  const Eigen::VectorXd logp_new = squashed_logp(z, cache.mean, s);

  const double inv_n = 1.0 / static_cast<double>(n);
  const double eps = cfg.clip_epsilon;

  double policy_loss = 0, kl = 0, clipped = 0;
  Eigen::MatrixXd dmean;
  Eigen::VectorXd dvalue, dlog_std;
  if (grad) {
    dmean.setZero(n, act);
    dlog_std.setZero(act);
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    double log_ratio = logp_new(i) - logp_old(i);
    bool saturated = false;
    if (log_ratio > 20.0 || log_ratio < -20.0) {
      // Guard rail against overflow in degenerate updates; gradients stop
      // here by design.
      log_ratio = std::clamp(log_ratio, -20.0, 20.0);
      saturated = true;
    }
    const double ratio = std::exp(log_ratio);
    const double surr1 = ratio * adv(i);
    const double surr2 = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * adv(i);
    policy_loss -= inv_n * std::min(surr1, surr2);
    kl += inv_n * (ratio - 1.0 - log_ratio);
    if (std::abs(ratio - 1.0) > eps) clipped += inv_n;

    if (grad && surr1 <= surr2 && !saturated) {
      // d(-surr1)/d(logp_new) = -adv * ratio; chain into mean and log_std.
      const double g = -inv_n * adv(i) * ratio;
      for (Eigen::Index j = 0; j < act; ++j) {
        const double diff = z(i, j) - cache.mean(i, j);
        dmean(i, j) += g * diff * inv_var(j);
        dlog_std(j) += g * (diff * diff * inv_var(j) - 1.0);
      }
    }
  }

  const Eigen::VectorXd verr = cache.value - ret;
  const double value_loss = verr.squaredNorm() * inv_n;

  // State-independent sigma: entropy of the base Gaussian, identical for
  // every sample.
  const double entropy =
      s.sum() + 0.5 * static_cast<double>(act) * (1.0 + kLog2Pi);

  const double total = policy_loss + cfg.value_coeff * value_loss -
                       cfg.entropy_coeff * entropy;
  if (!std::isfinite(total))
    throw NumericsError("ppo_loss: non-finite loss");

  if (grad) {
    dvalue = (2.0 * cfg.value_coeff * inv_n) * verr;
    dlog_std.array() -= cfg.entropy_coeff;
    net.backward(obs, cache, dmean, dvalue, dlog_std, *grad);
  }
  if (stats) {
    stats->policy_loss = policy_loss;
    stats->value_loss = value_loss;
    stats->entropy = entropy;
    stats->approx_kl = kl;
    stats->clip_fraction = clipped;
  }
  return total;
}

PpoStats ppo_update(Net& net, Adam& opt, const RolloutBuffer& buf,
                    const PpoConfig& cfg, SplitRng& shuffle_rng) {
  const Eigen::Index n = buf.obs.rows();
  if (n == 0) throw std::invalid_argument("ppo_update: empty buffer");
  if (n % cfg.minibatch_count != 0)
    throw std::invalid_argument(
        "ppo_update: batch not divisible by minibatch_count");
  const Eigen::Index mb_size = n / cfg.minibatch_count;

  // Batch-wide advantage normalization.
  const double mean = buf.advantages.mean();
  const double var =
      (buf.advantages.array() - mean).square().sum() /
      static_cast<double>(n);
  Eigen::VectorXd adv =
      ((buf.advantages.array() - mean) / (std::sqrt(var) + 1e-8)).matrix();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    order[static_cast<std::size_t>(i)] = i;

  Net grad(net.obs_dim(), net.act_dim(), net.hidden());
  Eigen::MatrixXd mb_obs(mb_size, net.obs_dim());
  Eigen::MatrixXd mb_z(mb_size, net.act_dim());
  Eigen::VectorXd mb_logp(mb_size), mb_adv(mb_size), mb_ret(mb_size);

  PpoStats acc;
  int updates = 0;
  for (int epoch = 0; epoch < cfg.epochs_per_batch; ++epoch) {
    // Fisher-Yates with the dedicated shuffle stream.
    for (Eigen::Index i = n - 1; i > 0; --i) {
      const Eigen::Index j = static_cast<Eigen::Index>(
          shuffle_rng.next_u64() % static_cast<std::uint64_t>(i + 1));
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(j)]);
    }
    for (int mb = 0; mb < cfg.minibatch_count; ++mb) {
      for (Eigen::Index k = 0; k < mb_size; ++k) {
        const Eigen::Index src =
            order[static_cast<std::size_t>(mb * mb_size + k)];
        mb_obs.row(k) = buf.obs.row(src);
        mb_z.row(k) = buf.z.row(src);
        mb_logp(k) = buf.logp(src);
        mb_adv(k) = adv(src);
        mb_ret(k) = buf.returns(src);
      }
      PpoStats st;
      try {
        ppo_loss(net, mb_obs, mb_z, mb_logp, mb_adv, mb_ret, cfg, &grad,
                 &st);
      } catch (const NumericsError& e) {
        throw NumericsError(std::string(e.what()) + " (epoch " +
                            std::to_string(epoch) + ", minibatch " +
                            std::to_string(mb) + ")");
      }
      st.grad_norm = clip_global_norm(grad.theta, cfg.grad_clip_norm);
      opt.step(net.theta, grad.theta);

      acc.policy_loss += st.policy_loss;
      acc.value_loss += st.value_loss;
      acc.entropy += st.entropy;
      acc.approx_kl += st.approx_kl;
      acc.clip_fraction += st.clip_fraction;
      acc.grad_norm += st.grad_norm;
      ++updates;
    }
  }
  const double inv = 1.0 / static_cast<double>(updates);
  acc.policy_loss *= inv;
  acc.value_loss *= inv;
  acc.entropy *= inv;
  acc.approx_kl *= inv;
  acc.clip_fraction *= inv;
  acc.grad_norm *= inv;
  return acc;
}

}  // namespace asv
