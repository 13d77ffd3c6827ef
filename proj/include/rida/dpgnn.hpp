#pragma once

// Depth-plus surrogate: decayed long-range feature propagation refined by
// per-vertex local-global attention, followed by an activation-free
// two-layer affine head that produces pseudo-labels.

#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rida/errors.hpp"
#include "rida/graphio.hpp"
#include "rida/random.hpp"
#include "rida/training.hpp"
#include "rida/types.hpp"

namespace rida {

struct PropagationConfig {
  int K = 16;
  double delta = 0.1;
  double gamma = 0.01;
  double omega = 0.9;
  bool use_global_attention = true;
  bool use_local_attention = true;
  bool use_bfp = true;

  bool attention_enabled() const { return use_global_attention || use_local_attention; }

  void validate() const {
    if (K < 1) throw ValidationError("K must be at least 1");
    if (!(delta >= 0.0)) throw ValidationError("delta must be non-negative");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in [0, 1)");
    if (!(omega >= 0.0 && omega <= 1.0)) throw ValidationError("omega must lie in [0, 1]");
  }
};

/// Layer weight delta * (1 - gamma)^k for the layer k >= 1 being produced.
inline double decay(int k, double delta, double gamma) {
  if (k < 1) throw ValidationError("decay is defined for k >= 1");
  return delta * std::pow(1.0 - gamma, k);
}

/// Missing entries become 0; observed entries x become x*omega + (1-omega).
/// Expects row-normalized attributes.
template <typename Scalar = double>
Mat<Scalar> initialize_features(const AttributeMatrix& normalized, double omega) {
  const Scalar w = static_cast<Scalar>(omega);
  Mat<Scalar> out(normalized.rows(), normalized.cols());
  for (Index i = 0; i < out.rows(); ++i) {
    for (Index j = 0; j < out.cols(); ++j) {
      out(i, j) = normalized.mask(i, j) ? static_cast<Scalar>(normalized.values(i, j)) * w + (Scalar(1) - w) : Scalar(0);
    }
  }
  return out;
}

/// Attribute-complete vs attribute-incomplete vertices. `observed[v]` lists the
/// observed columns of an incomplete vertex and is empty for complete ones.
struct BfpPartition {
  std::vector<Index> complete;
  std::vector<Index> incomplete;
  std::vector<std::vector<Index>> observed;
  std::vector<char> is_complete;
};

inline BfpPartition bfp_partition(const ObservationMask& mask) {
  BfpPartition p;
  const auto n = static_cast<std::size_t>(mask.rows());
  p.observed.resize(n);
  p.is_complete.resize(n);
  for (Index v = 0; v < mask.rows(); ++v) {
    if (mask.row(v).all()) {
      p.complete.push_back(v);
      p.is_complete[v] = 1;
      continue;
    }
    p.incomplete.push_back(v);
    for (Index j = 0; j < mask.cols(); ++j) {
      if (mask(v, j)) p.observed[v].push_back(j);
    }
  }
  return p;
}

struct AttentionFlags {
  bool local = true;
  bool global = true;
};

/// Cosine of two rows restricted to `coords` (all columns when empty
/// optional). A zero-norm side yields 0.
template <typename A, typename B>
auto masked_cosine(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b,
                   std::optional<std::span<const Index>> coords) -> typename A::Scalar {
  using Scalar = typename A::Scalar;
  Scalar dot = 0, na = 0, nb = 0;
  if (coords) {
    for (const Index j : *coords) {
      dot += a(j) * b(j);
      na += a(j) * a(j);
      nb += b(j) * b(j);
    }
  } else {
    dot = a.dot(b);
    na = a.squaredNorm();
    nb = b.squaredNorm();
  }
  if (na <= Scalar(0) || nb <= Scalar(0)) return Scalar(0);
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

/// Per-vertex attention coefficient: cos(candidate, previous) for the local
/// view times cos(candidate, initial) for the global view. A disabled view
/// contributes a factor of 1.
template <typename A, typename B, typename C>
auto lg_attention(const Eigen::MatrixBase<A>& candidate, const Eigen::MatrixBase<B>& previous,
                  const Eigen::MatrixBase<C>& initial, std::optional<std::span<const Index>> coords,
                  AttentionFlags flags) -> typename A::Scalar {
  using Scalar = typename A::Scalar;
  Scalar c = 1;
  if (flags.local) c *= masked_cosine(candidate, previous, coords);
  if (flags.global) c *= masked_cosine(candidate, initial, coords);
  return c;
}

/// X^(0)..X^(K) and the per-vertex coefficients used for each produced layer
/// (column k-1 holds layer k; all ones when attention is off).
template <typename Scalar>
struct LayerTrace {
  std::vector<Mat<Scalar>> layers;
  Mat<Scalar> attention;
  bool complete_record = true;

  const Mat<Scalar>& initial() const { return layers.front(); }
  const Mat<Scalar>& final() const { return layers.back(); }
};

/// Runs K propagation layers over the loop-free normalized adjacency.
///
/// Each layer forms the plain decayed candidate
///   X~ = λ_k Â X^(k-1) + (1 - λ_k) X^(k-1)
/// and, when attention is on, scores it against the previous and initial
/// layers per vertex, then re-mixes with weight λ_k C_v. Under BFP the
/// attribute-incomplete vertices score only over their observed columns.
/// With `record_all_layers` false only X^(0) and X^(K) are kept.
template <typename Scalar>
LayerTrace<Scalar> propagate(const Mat<Scalar>& initial, const NormalizedAdjacency<Scalar>& hat_a,
                             const PropagationConfig& cfg, const ObservationMask& mask,
                             bool record_all_layers = true) {
  cfg.validate();
  if (hat_a.variant != SelfLoops::without) {
    throw ValidationError("propagation expects the adjacency normalized without self-loops");
  }
  const Index n = initial.rows();
  const bool attend = cfg.attention_enabled();
  const AttentionFlags flags{cfg.use_local_attention, cfg.use_global_attention};
  std::optional<BfpPartition> partition;
  if (attend && cfg.use_bfp) partition = bfp_partition(mask);

  LayerTrace<Scalar> trace;
  trace.complete_record = record_all_layers;
  trace.attention = Mat<Scalar>::Ones(n, cfg.K);
  trace.layers.push_back(initial);

  Mat<Scalar> previous = initial;
  for (int k = 1; k <= cfg.K; ++k) {
    const Scalar lambda = static_cast<Scalar>(decay(k, cfg.delta, cfg.gamma));
    const Mat<Scalar> aggregated = hat_a.entries * previous;
    Mat<Scalar> next = lambda * aggregated + (Scalar(1) - lambda) * previous;
    if (attend) {
      for (Index v = 0; v < n; ++v) {
        std::optional<std::span<const Index>> coords;
        if (partition && !partition->is_complete[v]) coords = std::span<const Index>(partition->observed[v]);
        const Scalar c = lg_attention(next.row(v), previous.row(v), initial.row(v), coords, flags);
        trace.attention(v, k - 1) = c;
        next.row(v) = (lambda * c) * aggregated.row(v) + (Scalar(1) - lambda * c) * previous.row(v);
      }
    }
    previous = std::move(next);
    if (record_all_layers || k == cfg.K) trace.layers.push_back(previous);
  }
  return trace;
}

/// Ŷ = W1(W2 X + b1) + b2 written for row-per-vertex features:
/// logits = (X W2 + b1) W1 + b2.
template <typename Scalar>
struct TransformParams {
  Mat<Scalar> w2;   // d x hidden
  RowVec<Scalar> b1;
  Mat<Scalar> w1;   // hidden x c
  RowVec<Scalar> b2;

  static TransformParams zeros(Index d, Index hidden, Index classes) {
    return {Mat<Scalar>::Zero(d, hidden), RowVec<Scalar>::Zero(hidden), Mat<Scalar>::Zero(hidden, classes),
            RowVec<Scalar>::Zero(classes)};
  }
  bool all_finite() const { return w2.allFinite() && b1.allFinite() && w1.allFinite() && b2.allFinite(); }
};

struct TransformTraining {
  int epochs = 200;
  int hidden = 16;
  OptimizerConfig optimizer{Optimizer::adam, 0.01};
  std::uint64_t seed = 0;
};

template <typename Scalar>
Mat<Scalar> transform_logits(const TransformParams<Scalar>& p, const Mat<Scalar>& x) {
  Mat<Scalar> hidden = x * p.w2;
  hidden.rowwise() += p.b1;
  Mat<Scalar> logits = hidden * p.w1;
  logits.rowwise() += p.b2;
  return logits;
}

template <typename Scalar>
struct TransformGradient {
  Scalar loss = 0;
  TransformParams<Scalar> grad;
};

/// Mean cross-entropy over `rows` and its gradient with respect to every
/// head parameter.
template <typename Scalar>
TransformGradient<Scalar> transform_loss_and_gradient(const TransformParams<Scalar>& p, const Mat<Scalar>& x,
                                                      std::span<const Index> rows, std::span<const int> row_labels) {
  Mat<Scalar> hidden = x * p.w2;
  hidden.rowwise() += p.b1;
  Mat<Scalar> logits = hidden * p.w1;
  logits.rowwise() += p.b2;
  Mat<Scalar> d_logits;
  TransformGradient<Scalar> out;
  out.loss = softmax_cross_entropy(logits, rows, row_labels, &d_logits);
  out.grad.w1 = hidden.transpose() * d_logits;
  out.grad.b2 = d_logits.colwise().sum();
  const Mat<Scalar> d_hidden = d_logits * p.w1.transpose();
  out.grad.w2 = x.transpose() * d_hidden;
  out.grad.b1 = d_hidden.colwise().sum();
  return out;
}

/// Full-batch training of the head on the labeled vertices.
template <typename Scalar>
TransformParams<Scalar> train_transform(const Mat<Scalar>& features, const LabeledSplit& split,
                                        const TransformTraining& cfg) {
  if (!features.allFinite()) throw ValidationError("propagated features contain non-finite values");
  const Index d = features.cols();
  const Index classes = split.num_classes;
  Rng rng(cfg.seed);
  TransformParams<Scalar> p;
  p.w2 = glorot_uniform<Scalar>(d, cfg.hidden, rng);
  p.b1 = RowVec<Scalar>::Zero(cfg.hidden);
  p.w1 = glorot_uniform<Scalar>(cfg.hidden, classes, rng);
  p.b2 = RowVec<Scalar>::Zero(classes);

  // Only labeled rows enter the loss, so train on that slice directly.
  Mat<Scalar> x(static_cast<Index>(split.train_idx.size()), d);
  for (std::size_t i = 0; i < split.train_idx.size(); ++i) x.row(static_cast<Index>(i)) = features.row(split.train_idx[i]);
  std::vector<Index> rows(split.train_idx.size());
  std::iota(rows.begin(), rows.end(), Index{0});
  const auto targets = gather(split.labels, split.train_idx);

  ParameterUpdater<Scalar> updater(cfg.optimizer);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto g = transform_loss_and_gradient(p, x, rows, targets);
    if (!std::isfinite(static_cast<double>(g.loss))) throw DivergenceError("surrogate head", epoch);
    updater.next_epoch();
    updater.step(0, p.w2, g.grad.w2);
    updater.step(1, p.b1, g.grad.b1);
    updater.step(2, p.w1, g.grad.w1);
    updater.step(3, p.b2, g.grad.b2);
  }
  if (!p.all_finite()) throw DivergenceError("surrogate head", cfg.epochs);
  return p;
}

template <typename Scalar>
struct Prediction {
  Mat<Scalar> logits;
  Labels labels;
};

template <typename Scalar>
Prediction<Scalar> predict(const TransformParams<Scalar>& p, const Mat<Scalar>& features) {
  Prediction<Scalar> out;
  out.logits = transform_logits(p, features);
  out.labels = argmax_rows(out.logits);
  return out;
}

/// Writes each head block as "rows cols" followed by row-major values.
void save_transform(const TransformParams<double>& p, const std::string& path);
TransformParams<double> load_transform(const std::string& path);

}  // namespace rida
