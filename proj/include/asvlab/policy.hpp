#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "asvlab/config.hpp"
#include "asvlab/mlp.hpp"

namespace asv {

using Net = ActorCritic<double>;
using MatU8 =
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// ---------------------------------------------------------------------------
// Tanh-squashed Gaussian. Actions a = tanh(z), z ~ N(mean, diag(exp(2s))).
// The pre-squash z is kept everywhere so log-densities never need atanh.
// ---------------------------------------------------------------------------

/// log N(z; mean, exp(s)) - sum_j log(1 - tanh^2(z_j)), row-wise.
Eigen::VectorXd squashed_logp(const Eigen::Ref<const Eigen::MatrixXd>& z,
                              const Eigen::Ref<const Eigen::MatrixXd>& mean,
                              const Eigen::Ref<const Eigen::VectorXd>& s);

struct PolicySample {
  Eigen::MatrixXd z;       // n x act, pre-squash
  Eigen::MatrixXd action;  // n x act, tanh(z)
  Eigen::VectorXd logp;    // n
  Eigen::VectorXd value;   // n
};

/// Stochastic actions for a batch of observations. Normal draws go row by
/// row in component order from the caller's generator.
PolicySample sample_actions(const Net& net,
                            const Eigen::Ref<const Eigen::MatrixXd>& obs,
                            SplitRng& rng);

/// tanh(mean): the deterministic policy used for evaluation.
Eigen::MatrixXd deterministic_actions(
    const Net& net, const Eigen::Ref<const Eigen::MatrixXd>& obs);

Eigen::VectorXd values_of(const Net& net,
                          const Eigen::Ref<const Eigen::MatrixXd>& obs);

// ---------------------------------------------------------------------------
// Rollout storage: time-major T x N matrices for the per-step scalars, with
// observations and pre-squash actions flattened to row t*N + i.
// ---------------------------------------------------------------------------

struct RolloutBuffer {
  int horizon = 0, n_envs = 0;
  Eigen::MatrixXd obs;      // (T*N) x obs_dim
  Eigen::MatrixXd z;        // (T*N) x act_dim
  Eigen::VectorXd logp;     // T*N
  Eigen::MatrixXd rewards;  // T x N
  Eigen::MatrixXd values;   // T x N
  MatU8 done;               // T x N
  MatU8 truncated;          // T x N
  Eigen::MatrixXd trunc_value;  // T x N, V(final obs) where truncated
  Eigen::VectorXd last_value;   // N, V of the state after the last row
  Eigen::VectorXd advantages;   // T*N, filled by compute_gae
  Eigen::VectorXd returns;      // T*N

  void allocate(int horizon_steps, int envs, int obs_dim, int act_dim);
};

/// GAE(lambda) with per-env resets: terminal steps (done, not truncated)
/// bootstrap zero; truncated steps bootstrap trunc_value; the recursion
/// restarts after any episode boundary. lambda = 0 gives one-step TD
/// residuals, lambda = 1 discounted-sum-minus-baseline.
void compute_gae(RolloutBuffer& buf, double gamma, double lambda);

// ---------------------------------------------------------------------------
// Optimization
// ---------------------------------------------------------------------------

class Adam {
 public:
  Adam(Eigen::Index n, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);
  void step(Eigen::VectorXd& theta,
            const Eigen::Ref<const Eigen::VectorXd>& grad);
  double lr() const { return lr_; }

 private:
  Eigen::VectorXd m_, v_;
  double lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
};

/// Scale `g` so its l2 norm is at most max_norm; returns the pre-clip norm.
double clip_global_norm(Eigen::VectorXd& g, double max_norm);

// ---------------------------------------------------------------------------
// PPO
// ---------------------------------------------------------------------------

struct PpoStats {
  double policy_loss = 0;
  double value_loss = 0;
  double entropy = 0;
  double approx_kl = 0;
  double clip_fraction = 0;
  double grad_norm = 0;  // pre-clip, averaged over minibatches
};

/// Thrown when a loss goes non-finite; training stops, last checkpoint wins.
struct NumericsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Clipped-surrogate loss over one minibatch; returns the total loss and,
/// when `grad` is non-null, overwrites it with dLoss/dtheta. This one
/// function is both the training step and the finite-difference target.
double ppo_loss(const Net& net, const Eigen::Ref<const Eigen::MatrixXd>& obs,
                const Eigen::Ref<const Eigen::MatrixXd>& z,
                const Eigen::Ref<const Eigen::VectorXd>& logp_old,
                const Eigen::Ref<const Eigen::VectorXd>& adv,
                const Eigen::Ref<const Eigen::VectorXd>& ret,
                const PpoConfig& cfg, Net* grad, PpoStats* stats);

/// One PPO iteration over a full buffer: advantages normalized batch-wide,
/// then epochs x minibatches of shuffled updates. Deterministic given the
/// shuffle generator. Throws NumericsError on non-finite losses.
PpoStats ppo_update(Net& net, Adam& opt, const RolloutBuffer& buf,
                    const PpoConfig& cfg, SplitRng& shuffle_rng);

}  // namespace asv
