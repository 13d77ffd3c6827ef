#pragma once

// Holistic adversarial attack: decayed propagation matrices, positional
// feature blending, and the greedy bilevel edge-flip loop driven by analytic
// gradients through the self-loop normalization.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rida/dpgnn.hpp"
#include "rida/errors.hpp"
#include "rida/graph.hpp"
#include "rida/graphio.hpp"
#include "rida/training.hpp"
#include "rida/types.hpp"

namespace rida {

// --- Propagation matrices ---------------------------------------------------

/// T^(0) = Â, T^(k) = Â T^(k-1) for k = 0..K-1.
template <typename Scalar>
std::vector<Mat<Scalar>> build_transition_powers(const NormalizedAdjacency<Scalar>& hat_a, int K) {
  if (K < 1) throw ValidationError("K must be at least 1");
  std::vector<Mat<Scalar>> powers;
  powers.reserve(static_cast<std::size_t>(K));
  powers.push_back(Mat<Scalar>(hat_a.entries));
  for (int k = 1; k < K; ++k) powers.push_back(hat_a.entries * powers.back());
  return powers;
}

/// A_φ^(K-1) from A_φ^(0) = I and A_φ^(k) = λ_k T^(k-1) + (1 - λ_k) A_φ^(k-1).
template <typename Scalar>
Mat<Scalar> build_propagation_matrix(const std::vector<Mat<Scalar>>& powers, double delta, double gamma, int K) {
  if (K < 1) throw ValidationError("K must be at least 1");
  if (powers.empty() || static_cast<int>(powers.size()) < K - 1) {
    throw ValidationError("transition powers were built for a smaller K");
  }
  const Index n = powers.front().rows();
  Mat<Scalar> aphi = Mat<Scalar>::Identity(n, n);
  for (int k = 1; k <= K - 1; ++k) {
    const Scalar lambda = static_cast<Scalar>(decay(k, delta, gamma));
    aphi = lambda * powers[k - 1] + (Scalar(1) - lambda) * aphi;
  }
  return aphi;
}

/// Same matrix as build_propagation_matrix without storing every power.
template <typename Scalar>
Mat<Scalar> propagation_matrix(const NormalizedAdjacency<Scalar>& hat_a, double delta, double gamma, int K) {
  if (K < 1) throw ValidationError("K must be at least 1");
  const Index n = hat_a.entries.rows();
  Mat<Scalar> aphi = Mat<Scalar>::Identity(n, n);
  Mat<Scalar> power(hat_a.entries);
  for (int k = 1; k <= K - 1; ++k) {
    const Scalar lambda = static_cast<Scalar>(decay(k, delta, gamma));
    aphi = lambda * power + (Scalar(1) - lambda) * aphi;
    if (k < K - 1) power = hat_a.entries * power;
  }
  return aphi;
}

/// X_s = η A_φ X_n + (1 - η) X_n.
template <typename Scalar>
Mat<Scalar> optimize_features(const Mat<Scalar>& aphi, const Mat<Scalar>& normalized, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("eta must lie in [0, 1]");
  const Scalar e = static_cast<Scalar>(eta);
  if (e == Scalar(0)) return normalized;
  return e * (aphi * normalized) + (Scalar(1) - e) * normalized;
}

// --- Linear GCN surrogate -------------------------------------------------

/// Z = Ã (Ã X_s W2) W1 with no biases or activations.
template <typename Scalar>
struct SurrogateParams {
  Mat<Scalar> w2;  // d x hidden
  Mat<Scalar> w1;  // hidden x c
};

struct SurrogateTraining {
  int epochs = 100;
  int hidden = 16;
  OptimizerConfig optimizer{Optimizer::adam, 0.01};
  std::uint64_t seed = 0;
};

/// Sparse copy of the non-zero entries of a dense matrix.
template <typename Derived>
SparseMat<typename Derived::Scalar> sparse_view(const Eigen::MatrixBase<Derived>& dense) {
  using Scalar = typename Derived::Scalar;
  std::vector<Eigen::Triplet<Scalar>> triplets;
  for (Index i = 0; i < dense.rows(); ++i) {
    for (Index j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) != Scalar(0)) triplets.emplace_back(i, j, dense(i, j));
    }
  }
  SparseMat<Scalar> out(dense.rows(), dense.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

/// Ã_m built from a raw candidate adjacency (self-loops added, row-sum degrees).
template <typename Scalar>
SparseMat<Scalar> normalize_candidate(const Mat<Scalar>& candidate) {
  const Index n = candidate.rows();
  Vec<Scalar> degree = candidate.rowwise().sum();
  degree.array() += Scalar(1);
  if ((degree.array() <= Scalar(0)).any()) throw DegenerateDegreeError("candidate adjacency has a non-positive degree");
  const Vec<Scalar> s = degree.array().rsqrt();
  std::vector<Eigen::Triplet<Scalar>> triplets;
  for (Index i = 0; i < n; ++i) {
    triplets.emplace_back(i, i, (candidate(i, i) + Scalar(1)) * s[i] * s[i]);
    for (Index j = 0; j < n; ++j) {
      if (j != i && candidate(i, j) != Scalar(0)) triplets.emplace_back(i, j, candidate(i, j) * s[i] * s[j]);
    }
  }
  SparseMat<Scalar> out(n, n);
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

template <typename Scalar>
Mat<Scalar> surrogate_logits(const SurrogateParams<Scalar>& theta, const Mat<Scalar>& candidate, const Mat<Scalar>& xs) {
  const SparseMat<Scalar> norm = normalize_candidate(candidate);
  const Mat<Scalar> projected = xs * theta.w2 * theta.w1;
  const Mat<Scalar> once = norm * projected;
  return norm * once;
}

/// Fits θ on the labeled vertices with their true labels. `warm` seeds the
/// parameters instead of a fresh Glorot draw.
template <typename Scalar>
SurrogateParams<Scalar> train_surrogate(const Mat<Scalar>& candidate, const Mat<Scalar>& xs, const LabeledSplit& split,
                                        const SurrogateTraining& cfg, const SurrogateParams<Scalar>* warm = nullptr) {
  if ((candidate.array() < Scalar(0)).any()) throw ValidationError("candidate adjacency has negative entries");
  const SparseMat<Scalar> norm = normalize_candidate(candidate);
  const Mat<Scalar> once = norm * xs;

  const auto m = static_cast<Index>(split.train_idx.size());
  Mat<Scalar> twice(m, xs.cols());
  for (Index i = 0; i < m; ++i) twice.row(i) = norm.row(split.train_idx[i]) * once;

  SurrogateParams<Scalar> theta;
  if (warm) {
    theta = *warm;
  } else {
    Rng rng(cfg.seed);
    theta.w2 = glorot_uniform<Scalar>(xs.cols(), cfg.hidden, rng);
    theta.w1 = glorot_uniform<Scalar>(cfg.hidden, split.num_classes, rng);
  }
  std::vector<Index> rows(static_cast<std::size_t>(m));
  std::iota(rows.begin(), rows.end(), Index{0});
  const auto targets = gather(split.labels, split.train_idx);

  ParameterUpdater<Scalar> updater(cfg.optimizer);
  Mat<Scalar> d_logits;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const Mat<Scalar> hidden = twice * theta.w2;
    const Mat<Scalar> logits = hidden * theta.w1;
    const Scalar loss = softmax_cross_entropy(logits, rows, targets, &d_logits);
    if (!std::isfinite(static_cast<double>(loss))) throw DivergenceError("attack surrogate", epoch);
    const Mat<Scalar> grad_w1 = hidden.transpose() * d_logits;
    const Mat<Scalar> grad_w2 = twice.transpose() * (d_logits * theta.w1.transpose());
    updater.next_epoch();
    updater.step(0, theta.w2, grad_w2);
    updater.step(1, theta.w1, grad_w1);
  }
  return theta;
}

/// True labels on labeled vertices, pseudo-labels everywhere else.
Labels attack_targets(const LabeledSplit& split, const Labels& pseudo_labels);

/// Gradient of L_atk = -(mean cross-entropy over all vertices against
/// `targets`) with respect to the raw entries of the candidate adjacency,
/// differentiated through Ã = D̄^{-1/2}(A+I)D̄^{-1/2} including the degree
/// factors, then symmetrized.
template <typename Scalar>
Mat<Scalar> attack_gradient(const SurrogateParams<Scalar>& theta, const Mat<Scalar>& candidate, const Mat<Scalar>& xs,
                            const Labels& targets) {
  const Index n = candidate.rows();
  const SparseMat<Scalar> norm = normalize_candidate(candidate);
  Vec<Scalar> degree = candidate.rowwise().sum();
  degree.array() += Scalar(1);
  const Vec<Scalar> s = degree.array().rsqrt();

  const Mat<Scalar> projected = xs * theta.w2 * theta.w1;  // P
  const Mat<Scalar> once = norm * projected;               // Q = Ã P
  const Mat<Scalar> logits = norm * once;                  // Z = Ã Q

  std::vector<Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Index{0});
  Mat<Scalar> d_logits;
  softmax_cross_entropy(logits, rows, targets, &d_logits);

  // dL/dÃ = dZ Qᵀ + (Ãᵀ dZ) Pᵀ.
  const Mat<Scalar> back = norm.transpose() * d_logits;
  Mat<Scalar> grad = d_logits * once.transpose();
  grad.noalias() += back * projected.transpose();

  // Degree terms: each Ã_ij depends on d_i and d_j, and d_u is row u's sum.
  Vec<Scalar> through_degree = Vec<Scalar>::Zero(n);
  for (Index i = 0; i < n; ++i) {
    for (typename SparseMat<Scalar>::InnerIterator it(norm, i); it; ++it) {
      const Scalar contribution = grad(i, it.col()) * it.value();
      through_degree[i] += contribution;
      through_degree[it.col()] += contribution;
    }
  }
  through_degree.array() *= Scalar(-0.5) / degree.array();

  grad.array() *= (s * s.transpose()).array();
  grad.colwise() += through_degree;
  // L_atk is the negated training loss.
  grad = Scalar(-0.5) * (grad + grad.transpose()).eval();
  return grad;
}

// --- Perturbation bookkeeping -----------------------------------------------

enum class FlipAction { add, remove };

struct Flip {
  Index u = 0;
  Index v = 0;
  FlipAction action = FlipAction::add;

  friend bool operator==(const Flip&, const Flip&) = default;
};

/// Evolving A_p over a fixed clean graph.
class PerturbationState {
 public:
  using Int8Mat = Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  PerturbationState(const Graph& clean, Index budget_total);

  Index num_vertices() const { return clean_.rows(); }
  Index budget_total() const { return budget_total_; }
  Index budget_used() const { return static_cast<Index>(flips_.size()); }
  Index budget_remaining() const { return budget_total_ - budget_used(); }

  const Int8Mat& perturbation() const { return perturbation_; }
  const std::vector<Flip>& flips() const { return flips_; }
  bool already_flipped(Index u, Index v) const;
  bool current_edge(Index u, Index v) const { return clean_(u, v) + perturbation_(u, v) != 0; }
  Index current_degree(Index v) const { return degree_[v]; }

  /// Validates and records a flip; ADD requires a current non-edge, DEL an
  /// edge whose endpoints keep degree >= 1.
  void apply(const Flip& flip);

  template <typename Scalar = double>
  Mat<Scalar> current_adjacency() const {
    return (clean_.cast<int>() + perturbation_.cast<int>()).cast<Scalar>();
  }
  Graph perturbed_graph() const;

 private:
  Int8Mat clean_;
  Int8Mat perturbation_;
  std::vector<Index> degree_;
  std::set<std::pair<Index, Index>> flipped_;
  std::vector<Flip> flips_;
  Index budget_total_;
};

/// floor(|E| * epsilon).
Index perturbation_budget(Index num_edges, double epsilon);

/// How candidate scores are formed from the harm gradient H (the direction
/// that increases the surrogate's loss).
enum class ScoreRule {
  /// H(u,v) * (1 - 2 A_cur(u,v)): positive when flipping the pair helps.
  flip_direction,
  /// A_cur(u,v) * H(u,v): the literal elementwise "step" product; can only
  /// ever select deletions.
  elementwise_step,
};

/// Picks the admissible pair with the highest score after zeroing the
/// diagonal and shifting by the global minimum. Ties go to the
/// lexicographically smallest (u, v). Throws BudgetExhaustedError when the
/// budget is spent or no pair is admissible.
Flip select_perturbation(const MatrixXd& harm, const PerturbationState& state,
                         ScoreRule rule = ScoreRule::flip_direction);

struct AttackConfig {
  int K = 16;
  double delta = 0.1;
  double gamma = 0.01;
  double eta = 0.05;
  /// false uses the normalized attributes directly instead of X_s.
  bool use_feature_optimization = true;
  SurrogateTraining surrogate{};
  bool warm_start = false;
  std::uint64_t seed = 0;
  ScoreRule score_rule = ScoreRule::flip_direction;
};

struct AttackResult {
  PerturbationState state;
  Graph perturbed;
  std::vector<std::string> warnings;
};

/// Greedy poisoning loop: retrain the surrogate on A + A_p, take the attack
/// gradient against `pseudo_labels` (true labels on the labeled set), and
/// apply the best admissible flip, floor(|E| * epsilon) times.
AttackResult run_attack(const Graph& graph, const AttributeMatrix& x_phi, const LabeledSplit& split,
                        const Labels& pseudo_labels, double epsilon, const AttackConfig& cfg);

/// Positional features X_s for the attack (or X_n when feature optimization
/// is off).
MatrixXd attack_features(const Graph& graph, const AttributeMatrix& x_phi, const AttackConfig& cfg);

// --- Diff files -------------------------------------------------------------

/// "ADD u v" / "DEL u v" per line (u < v), in application order.
void write_diff(std::span<const Flip> flips, const std::filesystem::path& file);
std::vector<Flip> read_diff(const std::filesystem::path& file);
/// Applies a diff to a clean graph, validating each step.
Graph replay_diff(const Graph& clean, std::span<const Flip> flips);

}  // namespace rida
