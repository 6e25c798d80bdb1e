#pragma once

// Dense tanh multilayer perceptrons with hand-written reverse mode, Adam, and
// the two stochastic policy heads. Batches are stored column-wise: each
// column of an input matrix is one sample.

#include <Eigen/Core>
#include <Eigen/QR>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aacc/types.hpp"

namespace aacc {

template <typename Scalar>
class Mlp {
 public:
  using Vec = VectorX<Scalar>;
  using Mat = MatrixX<Scalar>;

  // Activations of every layer for one forward pass; activations[0] is the
  // input and activations.back() the output.
  struct Tape {
    std::vector<Mat> activations;
  };

  Mlp() = default;

  // Zero-initialized network with the given layer widths (input first).
  explicit Mlp(std::vector<int> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 2) throw std::invalid_argument("mlp needs at least input and output widths");
    Eigen::Index offset = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
      if (widths_[l] <= 0 || widths_[l + 1] <= 0) {
        throw std::invalid_argument("mlp layer widths must be positive");
      }
      offsets_.push_back(offset);
      offset += static_cast<Eigen::Index>(widths_[l + 1]) * (widths_[l] + 1);
    }
    params_ = Vec::Zero(offset);
  }

  const std::vector<int>& widths() const { return widths_; }
  int input_dim() const { return widths_.front(); }
  int output_dim() const { return widths_.back(); }
  int num_layers() const { return static_cast<int>(offsets_.size()); }
  Eigen::Index num_params() const { return params_.size(); }

  Vec& params() { return params_; }
  const Vec& params() const { return params_; }

  Eigen::Map<Mat> weight(int l) {
    return Eigen::Map<Mat>(params_.data() + offsets_[l], widths_[l + 1], widths_[l]);
  }
  Eigen::Map<const Mat> weight(int l) const {
    return Eigen::Map<const Mat>(params_.data() + offsets_[l], widths_[l + 1], widths_[l]);
  }
  Eigen::Map<Vec> bias(int l) {
    return Eigen::Map<Vec>(params_.data() + bias_offset(l), widths_[l + 1]);
  }
  Eigen::Map<const Vec> bias(int l) const {
    return Eigen::Map<const Vec>(params_.data() + bias_offset(l), widths_[l + 1]);
  }

  Mat forward(const Mat& inputs) const {
    check_input(inputs);
    Mat a = inputs;
    for (int l = 0; l < num_layers(); ++l) {
      Mat z = (weight(l) * a).colwise() + bias(l);
      if (l + 1 < num_layers()) z = z.array().tanh();
      a = std::move(z);
    }
    return a;
  }

  Mat forward(const Mat& inputs, Tape& tape) const {
    check_input(inputs);
    tape.activations.resize(static_cast<std::size_t>(num_layers()) + 1);
    tape.activations[0] = inputs;
    for (int l = 0; l < num_layers(); ++l) {
      Mat z = (weight(l) * tape.activations[l]).colwise() + bias(l);
      if (l + 1 < num_layers()) z = z.array().tanh();
      tape.activations[l + 1] = std::move(z);
    }
    return tape.activations.back();
  }

  // Accumulates dLoss/dparams into `grad` (sized num_params()) given
  // dLoss/doutput, and returns dLoss/dinput.
  Mat backward(const Tape& tape, const Mat& output_grad, Vec& grad) const {
    if (grad.size() != num_params()) throw std::invalid_argument("mlp gradient buffer has wrong size");
    if (tape.activations.size() != static_cast<std::size_t>(num_layers()) + 1) {
      throw std::invalid_argument("mlp backward without a matching forward tape");
    }
    Mat delta = output_grad;
    for (int l = num_layers() - 1; l >= 0; --l) {
      if (l + 1 < num_layers()) {
        delta.array() *= 1 - tape.activations[l + 1].array().square();
      }
      const Mat& prev = tape.activations[l];
      Eigen::Map<Mat>(grad.data() + offsets_[l], widths_[l + 1], widths_[l]).noalias() +=
          delta * prev.transpose();
      Eigen::Map<Vec>(grad.data() + bias_offset(l), widths_[l + 1]) += delta.rowwise().sum();
      Mat upstream = weight(l).transpose() * delta;
      delta = std::move(upstream);
    }
    return delta;
  }

  // Orthogonal weights scaled by `hidden_gain` (last layer: `output_gain`),
  // zero biases.
  void init_orthogonal(Rng& rng, Scalar hidden_gain, Scalar output_gain) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int l = 0; l < num_layers(); ++l) {
      const int rows = widths_[l + 1];
      const int cols = widths_[l];
      const bool tall = rows >= cols;
      Mat g(tall ? rows : cols, tall ? cols : rows);
      for (Eigen::Index j = 0; j < g.cols(); ++j) {
        for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = static_cast<Scalar>(normal(rng));
      }
      Eigen::HouseholderQR<Mat> qr(g);
      Mat q = qr.householderQ() * Mat::Identity(g.rows(), g.cols());
      const Mat r = qr.matrixQR().topRows(g.cols()).template triangularView<Eigen::Upper>();
      for (Eigen::Index j = 0; j < q.cols(); ++j) {
        if (r(j, j) < 0) q.col(j) = -q.col(j);
      }
      const Scalar gain = l + 1 < num_layers() ? hidden_gain : output_gain;
      weight(l) = gain * (tall ? q : Mat(q.transpose()));
      bias(l).setZero();
    }
  }

 private:
  Eigen::Index bias_offset(int l) const {
    return offsets_[l] + static_cast<Eigen::Index>(widths_[l + 1]) * widths_[l];
  }

  void check_input(const Mat& inputs) const {
    if (widths_.empty()) throw std::invalid_argument("mlp is empty");
    if (inputs.rows() != input_dim()) {
      throw std::invalid_argument("mlp input has " + std::to_string(inputs.rows()) +
                                  " rows, expected " + std::to_string(input_dim()));
    }
  }

  std::vector<int> widths_;
  std::vector<Eigen::Index> offsets_;
  Vec params_;
};

template <typename Scalar>
class Adam {
 public:
  using Vec = VectorX<Scalar>;

  Adam() = default;
  Adam(Eigen::Index size, Scalar learning_rate, Scalar beta1 = Scalar(0.9),
       Scalar beta2 = Scalar(0.999), Scalar epsilon = Scalar(1e-8))
      : lr_(learning_rate),
        beta1_(beta1),
        beta2_(beta2),
        eps_(epsilon),
        m_(Vec::Zero(size)),
        v_(Vec::Zero(size)) {}

  // Bias-corrected Adam update. Throws on non-finite gradients before
  // touching any state.
  void step(Eigen::Ref<Vec> params, const Vec& grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) {
      throw std::invalid_argument("adam: parameter/gradient size mismatch");
    }
    for (Eigen::Index i = 0; i < grad.size(); ++i) {
      if (!std::isfinite(static_cast<double>(grad(i)))) {
        std::ostringstream msg;
        msg << "adam: non-finite gradient at index " << i << " (value " << grad(i) << ", step "
            << t_ + 1 << ")";
        throw std::runtime_error(msg.str());
      }
    }
    ++t_;
    m_ = beta1_ * m_ + (1 - beta1_) * grad;
    v_ = beta2_ * v_ + (1 - beta2_) * grad.cwiseProduct(grad);
    const Scalar c1 = 1 - std::pow(beta1_, static_cast<Scalar>(t_));
    const Scalar c2 = 1 - std::pow(beta2_, static_cast<Scalar>(t_));
    params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
  }

  long steps() const { return t_; }
  Scalar learning_rate() const { return lr_; }
  void set_learning_rate(Scalar lr) { lr_ = lr; }
  const Vec& first_moment() const { return m_; }
  const Vec& second_moment() const { return v_; }

 private:
  Scalar lr_ = Scalar(1e-3);
  Scalar beta1_ = Scalar(0.9);
  Scalar beta2_ = Scalar(0.999);
  Scalar eps_ = Scalar(1e-8);
  long t_ = 0;
  Vec m_;
  Vec v_;
};

template <typename Scalar>
Scalar logsumexp(const VectorX<Scalar>& x) {
  const Scalar mx = x.maxCoeff();
  return mx + std::log((x.array() - mx).exp().sum());
}

template <typename Scalar>
VectorX<Scalar> log_softmax(const VectorX<Scalar>& logits) {
  return logits.array() - logsumexp(logits);
}

/// Categorical (softmax over logits) or diagonal Gaussian with a
/// state-independent learnable log standard deviation. Discrete actions are
/// length-1 vectors holding the index.
template <typename Scalar>
class PolicyHead {
 public:
  using Vec = VectorX<Scalar>;
  using Mat = MatrixX<Scalar>;

  enum class Kind { kCategorical, kDiagonalGaussian };

  PolicyHead() = default;

  static PolicyHead categorical(int num_actions) {
    if (num_actions < 1) throw std::invalid_argument("categorical head needs >= 1 action");
    PolicyHead h;
    h.kind_ = Kind::kCategorical;
    h.dim_ = num_actions;
    return h;
  }

  static PolicyHead diagonal_gaussian(int action_dim, Scalar init_log_std = 0) {
    if (action_dim < 1) throw std::invalid_argument("gaussian head needs >= 1 dimension");
    PolicyHead h;
    h.kind_ = Kind::kDiagonalGaussian;
    h.dim_ = action_dim;
    h.log_std_ = Vec::Constant(action_dim, init_log_std);
    return h;
  }

  Kind kind() const { return kind_; }
  bool discrete() const { return kind_ == Kind::kCategorical; }
  // Width of the network output feeding this head.
  int input_dim() const { return dim_; }
  int action_dim() const { return discrete() ? 1 : dim_; }
  Vec& log_std() { return log_std_; }
  const Vec& log_std() const { return log_std_; }

  Vec probabilities(const Vec& logits) const { return log_softmax(logits).array().exp(); }

  struct Sample {
    Vec action;
    Scalar log_prob;
  };

  Sample sample(const Vec& head_input, Rng& rng) const {
    check(head_input);
    if (discrete()) {
      const Vec logp = log_softmax<Scalar>(head_input);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      const double x = u(rng);
      double cum = 0.0;
      int a = dim_ - 1;
      for (int i = 0; i < dim_; ++i) {
        cum += std::exp(static_cast<double>(logp(i)));
        if (x < cum) {
          a = i;
          break;
        }
      }
      return {Vec::Constant(1, static_cast<Scalar>(a)), logp(a)};
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec action(dim_);
    for (int i = 0; i < dim_; ++i) {
      action(i) = head_input(i) + std::exp(log_std_(i)) * static_cast<Scalar>(normal(rng));
    }
    return {action, log_prob(head_input, action)};
  }

  Scalar log_prob(const Vec& head_input, const Vec& action) const {
    check(head_input);
    if (discrete()) return log_softmax<Scalar>(head_input)(action_index(action(0)));
    const Vec z = (action - head_input).array() / log_std_.array().exp();
    return -Scalar(0.5) * z.squaredNorm() - log_std_.sum() -
           Scalar(0.5) * dim_ * std::log(2 * std::numbers::pi_v<Scalar>);
  }

  Vec log_probs(const Mat& inputs, const Mat& actions) const {
    Vec out(inputs.cols());
    for (Eigen::Index i = 0; i < inputs.cols(); ++i) {
      out(i) = log_prob(inputs.col(i), actions.col(i));
    }
    return out;
  }

  // Gradient of sum_i weights(i) * log p(actions_i | inputs_i) with respect
  // to the head inputs; the log-std part is accumulated into log_std_grad.
  Mat log_prob_backward(const Mat& inputs, const Mat& actions, const Vec& weights,
                        Vec& log_std_grad) const {
    Mat grad(inputs.rows(), inputs.cols());
    if (discrete()) {
      for (Eigen::Index i = 0; i < inputs.cols(); ++i) {
        grad.col(i) = -probabilities(inputs.col(i)) * weights(i);
        grad(action_index(actions(0, i)), i) += weights(i);
      }
      return grad;
    }
    if (log_std_grad.size() != dim_) log_std_grad = Vec::Zero(dim_);
    const Vec inv_var = (-2 * log_std_).array().exp();
    for (Eigen::Index i = 0; i < inputs.cols(); ++i) {
      const Vec diff = actions.col(i) - inputs.col(i);
      grad.col(i) = diff.cwiseProduct(inv_var) * weights(i);
      log_std_grad.array() +=
          weights(i) * (diff.array().square() * inv_var.array() - Scalar(1));
    }
    return grad;
  }

  Vec entropies(const Mat& inputs) const {
    Vec out(inputs.cols());
    const Scalar gauss = log_std_.sum() +
                         Scalar(0.5) * dim_ * (1 + std::log(2 * std::numbers::pi_v<Scalar>));
    for (Eigen::Index i = 0; i < inputs.cols(); ++i) {
      if (discrete()) {
        const Vec logp = log_softmax<Scalar>(inputs.col(i));
        out(i) = -(logp.array().exp() * logp.array()).sum();
      } else {
        out(i) = gauss;
      }
    }
    return out;
  }

  // Gradient of sum_i weights(i) * H(inputs_i).
  Mat entropy_backward(const Mat& inputs, const Vec& weights, Vec& log_std_grad) const {
    Mat grad = Mat::Zero(inputs.rows(), inputs.cols());
    if (discrete()) {
      for (Eigen::Index i = 0; i < inputs.cols(); ++i) {
        const Vec logp = log_softmax<Scalar>(inputs.col(i));
        const Vec p = logp.array().exp();
        const Scalar h = -(p.array() * logp.array()).sum();
        grad.col(i) = -weights(i) * (p.array() * (logp.array() + h)).matrix();
      }
      return grad;
    }
    if (log_std_grad.size() != dim_) log_std_grad = Vec::Zero(dim_);
    log_std_grad.array() += weights.sum();
    return grad;
  }

 private:
  void check(const Vec& head_input) const {
    if (head_input.size() != dim_) {
      throw std::invalid_argument("policy head input has " + std::to_string(head_input.size()) +
                                  " entries, expected " + std::to_string(dim_));
    }
  }

  int action_index(Scalar a) const {
    const int idx = static_cast<int>(std::lround(static_cast<double>(a)));
    if (idx < 0 || idx >= dim_) throw std::out_of_range("categorical action index out of range");
    return idx;
  }

  Kind kind_ = Kind::kCategorical;
  int dim_ = 0;
  Vec log_std_;
};

}  // namespace aacc
