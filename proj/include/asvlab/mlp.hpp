#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "asvlab/rng.hpp"

namespace asv {

/// Two-headed tanh MLP (actor mean + critic value) plus a state-independent
/// log-std vector, all parameters in one flat vector. The flat layout makes
/// the optimizer, gradient clipping, finite-difference checks, and
/// checkpointing trivial: they all see a single contiguous array.
///
/// Blocks, in flat order (matrices column-major in memory; x*W convention,
/// so W is in_dim x out_dim):
///   actor_w1 actor_b1 actor_w2 actor_b2 actor_w3 actor_b3
///   critic_w1 critic_b1 critic_w2 critic_b2 critic_w3 critic_b3
///   log_std
template <typename Scalar>
class ActorCritic {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MapMat = Eigen::Map<Mat>;
  using MapVec = Eigen::Map<Vec>;
  using CMapMat = Eigen::Map<const Mat>;
  using CMapVec = Eigen::Map<const Vec>;

  struct BlockInfo {
    std::string name;
    Eigen::Index rows, cols, offset;
  };

  ActorCritic(int obs_dim, int act_dim, int hidden)
      : obs_dim_(obs_dim), act_dim_(act_dim), hidden_(hidden) {
    if (obs_dim < 1 || act_dim < 1 || hidden < 1)
      throw std::invalid_argument("ActorCritic: dims must be positive");
    Eigen::Index off = 0;
    auto block = [&](const std::string& name, Eigen::Index r,
                     Eigen::Index c) {
      blocks_.push_back({name, r, c, off});
      off += r * c;
    };
    block("actor_w1", obs_dim, hidden);
    block("actor_b1", hidden, 1);
    block("actor_w2", hidden, hidden);
    block("actor_b2", hidden, 1);
    block("actor_w3", hidden, act_dim);
    block("actor_b3", act_dim, 1);
    block("critic_w1", obs_dim, hidden);
    block("critic_b1", hidden, 1);
    block("critic_w2", hidden, hidden);
    block("critic_b2", hidden, 1);
    block("critic_w3", hidden, 1);
    block("critic_b3", 1, 1);
    block("log_std", act_dim, 1);
    theta = Vec::Zero(off);
  }

  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }
  int hidden() const { return hidden_; }
  const std::vector<BlockInfo>& blocks() const { return blocks_; }

  // Flat parameter vector; everything below is a view into it.
  Vec theta;

  MapMat block(int i) {
    const BlockInfo& b = blocks_[static_cast<std::size_t>(i)];
    return MapMat(theta.data() + b.offset, b.rows, b.cols);
  }
  CMapMat block(int i) const {
    const BlockInfo& b = blocks_[static_cast<std::size_t>(i)];
    return CMapMat(theta.data() + b.offset, b.rows, b.cols);
  }

  CMapMat aw1() const { return block(0); }
  CMapVec ab1() const { return vec(1); }
  CMapMat aw2() const { return block(2); }
  CMapVec ab2() const { return vec(3); }
  CMapMat aw3() const { return block(4); }
  CMapVec ab3() const { return vec(5); }
  CMapMat cw1() const { return block(6); }
  CMapVec cb1() const { return vec(7); }
  CMapMat cw2() const { return block(8); }
  CMapVec cb2() const { return vec(9); }
  CMapMat cw3() const { return block(10); }
  CMapVec cb3() const { return vec(11); }
  CMapVec log_std() const { return vec(12); }
  MapVec log_std() { return vec_mut(12); }

  /// Orthogonal weights (gain sqrt(2) hidden, 0.01 actor head, 1 critic
  /// head), zero biases, constant log-std. The small actor head keeps early
  /// actions near the curve's linear region.
  static ActorCritic init(int obs_dim, int act_dim, int hidden,
                          double log_std_init, SplitRng& rng) {
    ActorCritic net(obs_dim, act_dim, hidden);
    const Scalar root2 = std::sqrt(Scalar(2));
    net.block(0) = orthogonal(obs_dim, hidden, root2, rng);
    net.block(2) = orthogonal(hidden, hidden, root2, rng);
    net.block(4) = orthogonal(hidden, act_dim, Scalar(0.01), rng);
    net.block(6) = orthogonal(obs_dim, hidden, root2, rng);
    net.block(8) = orthogonal(hidden, hidden, root2, rng);
    net.block(10) = orthogonal(hidden, 1, Scalar(1), rng);
    net.log_std().setConstant(Scalar(log_std_init));
    return net;
  }

  struct Cache {
    Mat a1, a2, c1, c2, mean;
    Vec value;
  };

  /// mean (n x act) and value (n) for obs x (n x obs_dim); activations kept
  /// for backward.
  void forward(const Eigen::Ref<const Mat>& x, Cache& c) const {
    c.a1 =
        ((x * aw1()).rowwise() + ab1().transpose()).array().tanh().matrix();
    c.a2 = ((c.a1 * aw2()).rowwise() + ab2().transpose())
               .array()
               .tanh()
               .matrix();
    c.mean = (c.a2 * aw3()).rowwise() + ab3().transpose();
    c.c1 =
        ((x * cw1()).rowwise() + cb1().transpose()).array().tanh().matrix();
    c.c2 = ((c.c1 * cw2()).rowwise() + cb2().transpose())
               .array()
               .tanh()
               .matrix();
    c.value = ((c.c2 * cw3()).col(0).array() + cb3()(0)).matrix();
  }

  /// Accumulates nothing: overwrites `grad` with dLoss/dtheta given the
  /// upstream derivatives w.r.t. mean rows, value entries, and log_std.
  void backward(const Eigen::Ref<const Mat>& x, const Cache& c,
                const Eigen::Ref<const Mat>& dmean,
                const Eigen::Ref<const Vec>& dvalue,
                const Eigen::Ref<const Vec>& dlog_std,
                ActorCritic& grad) const {
    auto g = [&grad](int i) { return grad.block(i); };

    g(5) = dmean.colwise().sum().transpose();
    g(4) = c.a2.transpose() * dmean;
    Mat dz = ((dmean * aw3().transpose()).array() *
              (1 - c.a2.array().square()))
                 .matrix();
    g(3) = dz.colwise().sum().transpose();
    g(2) = c.a1.transpose() * dz;
    dz = ((dz * aw2().transpose()).array() * (1 - c.a1.array().square()))
             .matrix();
    g(1) = dz.colwise().sum().transpose();
    g(0) = x.transpose() * dz;

    g(11)(0, 0) = dvalue.sum();
    g(10) = c.c2.transpose() * dvalue;
    dz = ((dvalue * cw3().transpose()).array() *
          (1 - c.c2.array().square()))
             .matrix();
    g(9) = dz.colwise().sum().transpose();
    g(8) = c.c1.transpose() * dz;
    dz = ((dz * cw2().transpose()).array() * (1 - c.c1.array().square()))
             .matrix();
    g(7) = dz.colwise().sum().transpose();
    g(6) = x.transpose() * dz;

    g(12) = dlog_std;
  }

 private:
  CMapVec vec(int i) const {
    const BlockInfo& b = blocks_[static_cast<std::size_t>(i)];
    return CMapVec(theta.data() + b.offset, b.rows * b.cols);
  }
  MapVec vec_mut(int i) {
    const BlockInfo& b = blocks_[static_cast<std::size_t>(i)];
    return MapVec(theta.data() + b.offset, b.rows * b.cols);
  }

  static Mat orthogonal(Eigen::Index rows, Eigen::Index cols, Scalar gain,
                        SplitRng& rng) {
    const Eigen::Index n = std::max(rows, cols);
    const Eigen::Index m = std::min(rows, cols);
    Mat init(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        init(i, j) = static_cast<Scalar>(rng.normal());
    Eigen::HouseholderQR<Mat> qr(init);
    Mat q = qr.householderQ() * Mat::Identity(n, m);
    const Mat r = qr.matrixQR().template triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < m; ++j)
      if (r(j, j) < 0) q.col(j) = -q.col(j);
    q *= gain;
    if (rows >= cols) return q;
    return q.transpose();
  }

  int obs_dim_, act_dim_, hidden_;
  std::vector<BlockInfo> blocks_;
};

}  // namespace asv
