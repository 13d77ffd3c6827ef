#pragma once

// Shared fixtures for unit, integration and acceptance tests.

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "rida/graph.hpp"
#include "rida/graphio.hpp"
#include "rida/random.hpp"

namespace rida::testing {

/// Connected random graph: a random spanning tree plus extra edges, each
/// remaining pair kept with probability `p`.
inline Graph random_connected_graph(Index n, double p, Rng& rng) {
  std::vector<Edge> edges;
  std::vector<std::vector<char>> taken(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0));
  for (Index v = 1; v < n; ++v) {
    const auto u = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(v)));
    edges.push_back(make_edge(u, v));
    taken[u][v] = taken[v][u] = 1;
  }
  for (Index u = 0; u < n; ++u) {
    for (Index v = u + 1; v < n; ++v) {
      if (!taken[u][v] && rng.uniform01() < p) edges.push_back({u, v});
    }
  }
  return Graph(n, edges);
}

/// Contextual stochastic block model: vertex v has class v % classes, edges
/// appear with p_in inside a class and p_out across, and each binary
/// attribute fires with `signal` on the class's own block of columns and
/// `noise` elsewhere. The returned graph is not necessarily connected.
inline Dataset csbm(Index n, Index d, int classes, double p_in, double p_out, double signal, double noise,
                    std::uint64_t seed) {
  Rng rng(seed);
  Labels labels(static_cast<std::size_t>(n));
  for (Index v = 0; v < n; ++v) labels[v] = static_cast<int>(v % classes);
  std::vector<Edge> edges;
  for (Index u = 0; u < n; ++u) {
    for (Index v = u + 1; v < n; ++v) {
      if (rng.uniform01() < (labels[u] == labels[v] ? p_in : p_out)) edges.push_back({u, v});
    }
  }
  MatrixXd x = MatrixXd::Zero(n, d);
  const Index block = d / classes;
  for (Index v = 0; v < n; ++v) {
    for (Index j = 0; j < d; ++j) {
      const bool own = j / block == labels[v];
      if (rng.uniform01() < (own ? signal : noise)) x(v, j) = 1.0;
    }
  }
  Dataset out;
  out.graph = Graph(n, edges);
  out.attributes = AttributeMatrix(std::move(x));
  out.labels = std::move(labels);
  return out;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    Rng rng(std::hash<std::string>{}(tag) ^ reinterpret_cast<std::uintptr_t>(this));
    path_ = std::filesystem::temp_directory_path() / ("rida-" + tag + "-" + std::to_string(rng.next() % 1000000007));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace rida::testing
