#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rida/errors.hpp"
#include "rida/graph.hpp"
#include "rida/types.hpp"

namespace rida {

/// Dense attribute values paired with an observation mask. Unobserved
/// entries are stored as 0.
struct AttributeMatrix {
  MatrixXd values;
  ObservationMask mask;

  AttributeMatrix() = default;
  /// Fully observed.
  explicit AttributeMatrix(MatrixXd v) : values(std::move(v)), mask(ObservationMask::Constant(values.rows(), values.cols(), true)) {}
  AttributeMatrix(MatrixXd v, ObservationMask m) : values(std::move(v)), mask(std::move(m)) {}

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
  bool is_complete() const { return mask.all(); }
  Index missing_count() const { return mask.size() - mask.count(); }
};

struct Dataset {
  Graph graph;
  AttributeMatrix attributes;
  Labels labels;

  int num_classes() const;
};

struct LabeledSplit {
  Labels labels;
  std::vector<Index> train_idx;
  std::vector<Index> test_idx;
  int num_classes = 0;
  std::vector<std::string> warnings;
};

enum class SelfLoops { with, without };

/// Symmetric degree-normalized adjacency. `with` is D̄^{-1/2}(A+I)D̄^{-1/2};
/// `without` is D^{-1/2} A D^{-1/2}.
template <typename Scalar>
struct NormalizedAdjacency {
  SelfLoops variant = SelfLoops::with;
  SparseMat<Scalar> entries;
};

// --- Text formats -----------------------------------------------------------

/// Reads edges.tsv, attrs.tsv and labels.tsv from `dir`.
Dataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const Dataset& data, const std::filesystem::path& dir);

/// Edge list for a graph whose vertex count is known from elsewhere.
Graph read_edges(const std::filesystem::path& file, Index num_vertices);
void write_edges(const Graph& g, const std::filesystem::path& file);

// --- Structural preprocessing ----------------------------------------------

/// Vertices of the largest component; ties go to the component holding the
/// smallest vertex id.
std::vector<Index> largest_component_vertices(const Graph& g);

/// Restricts the dataset to its largest connected component, re-indexing by
/// ascending original id.
Dataset largest_connected_component(const Dataset& data);

template <typename Scalar = double>
NormalizedAdjacency<Scalar> normalize_adjacency(const Graph& g, SelfLoops self_loops) {
  const Index n = g.num_vertices();
  const Scalar loop = self_loops == SelfLoops::with ? Scalar(1) : Scalar(0);
  Vec<Scalar> inv_sqrt(n);
  for (Index v = 0; v < n; ++v) {
    const Scalar d = static_cast<Scalar>(g.degree(v)) + loop;
    if (d <= Scalar(0)) {
      throw DegenerateDegreeError("vertex " + std::to_string(v) + " has no neighbours");
    }
    inv_sqrt[v] = Scalar(1) / std::sqrt(d);
  }
  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(static_cast<std::size_t>(2 * g.num_edges() + n));
  for (const auto& e : g.edges()) {
    const Scalar w = inv_sqrt[e.u] * inv_sqrt[e.v];
    triplets.emplace_back(e.u, e.v, w);
    triplets.emplace_back(e.v, e.u, w);
  }
  if (self_loops == SelfLoops::with) {
    for (Index v = 0; v < n; ++v) triplets.emplace_back(v, v, inv_sqrt[v] * inv_sqrt[v]);
  }
  NormalizedAdjacency<Scalar> out;
  out.variant = self_loops;
  out.entries.resize(n, n);
  out.entries.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

/// Same normalization applied to a dense (possibly non-binary) adjacency;
/// degrees are row sums.
template <typename Derived>
Mat<typename Derived::Scalar> normalize_dense(const Eigen::MatrixBase<Derived>& adjacency, SelfLoops self_loops) {
  using Scalar = typename Derived::Scalar;
  Mat<Scalar> m = adjacency;
  if (self_loops == SelfLoops::with) m.diagonal().array() += Scalar(1);
  const Vec<Scalar> degree = m.rowwise().sum();
  if ((degree.array() <= Scalar(0)).any()) throw DegenerateDegreeError("zero-degree vertex in dense adjacency");
  const Vec<Scalar> s = degree.array().rsqrt();
  return s.asDiagonal() * m * s.asDiagonal();
}

/// Uniformly random labeled/unlabeled split with round-half-up labeled count.
LabeledSplit split_labels(const Labels& labels, double fraction, std::uint64_t seed);

/// Divides every row by the L1 norm of its observed entries. Rows with zero
/// observed mass stay zero; the mask is untouched.
AttributeMatrix row_normalize_attributes(const AttributeMatrix& x);

}  // namespace rida
