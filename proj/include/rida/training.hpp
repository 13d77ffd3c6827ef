#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "rida/random.hpp"
#include "rida/types.hpp"

namespace rida {

enum class Optimizer { adam, gradient_descent };

/// Full-batch first-order update shared by every trainable model here.
struct OptimizerConfig {
  Optimizer kind = Optimizer::adam;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One moment pair per parameter block.
template <typename Scalar>
class ParameterUpdater {
 public:
  explicit ParameterUpdater(OptimizerConfig config) : config_(config) {}

  /// Applies one step to `param` given its gradient; `slot` identifies the
  /// block so Adam can keep per-block moments.
  template <typename Derived, typename GradDerived>
  void step(std::size_t slot, Eigen::MatrixBase<Derived>& param, const Eigen::MatrixBase<GradDerived>& grad) {
    const Scalar lr = static_cast<Scalar>(config_.learning_rate);
    if (config_.kind == Optimizer::gradient_descent) {
      param -= lr * grad;
      return;
    }
    if (slot >= first_.size()) {
      first_.resize(slot + 1);
      second_.resize(slot + 1);
    }
    auto& m = first_[slot];
    auto& v = second_[slot];
    if (m.size() == 0) {
      m = Mat<Scalar>::Zero(grad.rows(), grad.cols());
      v = Mat<Scalar>::Zero(grad.rows(), grad.cols());
    }
    const Scalar b1 = static_cast<Scalar>(config_.beta1);
    const Scalar b2 = static_cast<Scalar>(config_.beta2);
    m = b1 * m + (Scalar(1) - b1) * grad;
    v = b2 * v + (Scalar(1) - b2) * grad.cwiseAbs2();
    const Scalar c1 = Scalar(1) - std::pow(b1, static_cast<Scalar>(t_));
    const Scalar c2 = Scalar(1) - std::pow(b2, static_cast<Scalar>(t_));
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + static_cast<Scalar>(config_.epsilon));
  }

  /// Call once per epoch before the per-block steps.
  void next_epoch() { ++t_; }

 private:
  OptimizerConfig config_;
  long t_ = 0;
  std::vector<Mat<Scalar>> first_;
  std::vector<Mat<Scalar>> second_;
};

/// Glorot/Xavier uniform initialization.
template <typename Scalar>
Mat<Scalar> glorot_uniform(Index rows, Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Mat<Scalar> w(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) w(i, j) = static_cast<Scalar>(rng.uniform(-limit, limit));
  }
  return w;
}

/// Mean softmax cross-entropy over `rows` of `logits`. When `grad` is non-null
/// it receives dLoss/dLogits for all rows (zero outside `rows`).
template <typename Derived>
typename Derived::Scalar softmax_cross_entropy(const Eigen::MatrixBase<Derived>& logits, std::span<const Index> rows,
                                               std::span<const int> row_labels,
                                               Mat<typename Derived::Scalar>* grad = nullptr) {
  using Scalar = typename Derived::Scalar;
  if (grad) grad->setZero(logits.rows(), logits.cols());
  if (rows.empty()) return Scalar(0);
  const Scalar inv_count = Scalar(1) / static_cast<Scalar>(rows.size());
  Scalar loss = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = rows[i];
    const auto z = logits.row(r);
    const Scalar top = z.maxCoeff();
    const auto shifted = (z.array() - top).eval();
    const Scalar log_sum = std::log(shifted.exp().sum());
    loss -= (shifted(row_labels[i]) - log_sum) * inv_count;
    if (grad) {
      grad->row(r) = (shifted - log_sum).exp().matrix() * inv_count;
      (*grad)(r, row_labels[i]) -= inv_count;
    }
  }
  return loss;
}

/// Row-wise argmax; ties resolve to the lowest column.
template <typename Derived>
Labels argmax_rows(const Eigen::MatrixBase<Derived>& m) {
  Labels out(static_cast<std::size_t>(m.rows()));
  for (Index r = 0; r < m.rows(); ++r) {
    Index best = 0;
    for (Index c = 1; c < m.cols(); ++c) {
      if (m(r, c) > m(r, best)) best = c;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

/// Labels gathered at `rows`.
inline std::vector<int> gather(const Labels& labels, std::span<const Index> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(labels[r]);
  return out;
}

}  // namespace rida
