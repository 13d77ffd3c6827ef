#pragma once

#include <compare>
#include <span>
#include <vector>

#include "rida/types.hpp"

namespace rida {

/// Unordered vertex pair stored with u < v.
struct Edge {
  Index u = 0;
  Index v = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge make_edge(Index a, Index b) { return a < b ? Edge{a, b} : Edge{b, a}; }

/// Undirected simple graph on vertices 0..n-1.
///
/// Edges are kept sorted and unique; neighbour lists are sorted. The
/// constructor rejects self-loops, duplicate pairs and out-of-range ids with
/// ValidationError instead of repairing them.
class Graph {
 public:
  Graph() = default;
  Graph(Index num_vertices, std::span<const Edge> edges);

  Index num_vertices() const { return n_; }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Index>& neighbors(Index v) const { return adjacency_[v]; }
  Index degree(Index v) const { return static_cast<Index>(adjacency_[v].size()); }
  std::vector<Index> degrees() const;
  bool has_edge(Index u, Index v) const;

  /// Dense 0/1 adjacency matrix.
  template <typename Scalar = double>
  Mat<Scalar> dense_adjacency() const {
    Mat<Scalar> a = Mat<Scalar>::Zero(n_, n_);
    for (const auto& e : edges_) {
      a(e.u, e.v) = Scalar(1);
      a(e.v, e.u) = Scalar(1);
    }
    return a;
  }

  /// Builds a graph from a symmetric 0/1 matrix (diagonal must be zero).
  template <typename Derived>
  static Graph from_dense(const Eigen::MatrixBase<Derived>& a) {
    std::vector<Edge> edges;
    for (Index u = 0; u < a.rows(); ++u) {
      for (Index v = u + 1; v < a.cols(); ++v) {
        if (a(u, v) != 0) edges.push_back({u, v});
      }
    }
    return Graph(a.rows(), edges);
  }

  friend bool operator==(const Graph& a, const Graph& b) { return a.n_ == b.n_ && a.edges_ == b.edges_; }

 private:
  Index n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<Index>> adjacency_;
};

/// Vertices grouped by connected component; each group sorted ascending and
/// groups ordered by their smallest member.
std::vector<std::vector<Index>> connected_components(const Graph& g);

bool is_connected(const Graph& g);

/// Subgraph induced on `vertices` (sorted ascending), re-indexed 0..k-1 in
/// that order.
Graph induced_subgraph(const Graph& g, std::span<const Index> vertices);

}  // namespace rida
