#include "rida/graph.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "rida/errors.hpp"

namespace rida {

Graph::Graph(Index num_vertices, std::span<const Edge> edges) : n_(num_vertices) {
  if (num_vertices < 0) throw ValidationError("negative vertex count");
  edges_.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= n_ || e.v >= n_) {
      throw ValidationError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                            ") out of range for " + std::to_string(n_) + " vertices");
    }
    if (e.u == e.v) throw ValidationError("self-loop at vertex " + std::to_string(e.u));
    edges_.push_back(make_edge(e.u, e.v));
  }
  std::sort(edges_.begin(), edges_.end());
  if (auto dup = std::adjacent_find(edges_.begin(), edges_.end()); dup != edges_.end()) {
    throw ValidationError("duplicate edge (" + std::to_string(dup->u) + ", " + std::to_string(dup->v) + ")");
  }
  adjacency_.assign(static_cast<std::size_t>(n_), {});
  for (const auto& e : edges_) {
    adjacency_[e.u].push_back(e.v);
    adjacency_[e.v].push_back(e.u);
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
}

std::vector<Index> Graph::degrees() const {
  std::vector<Index> out(static_cast<std::size_t>(n_));
  for (Index v = 0; v < n_; ++v) out[v] = degree(v);
  return out;
}

bool Graph::has_edge(Index u, Index v) const {
  if (u < 0 || v < 0 || u >= n_ || v >= n_) return false;
  const auto& list = adjacency_[u];
  return std::binary_search(list.begin(), list.end(), v);
}

std::vector<std::vector<Index>> connected_components(const Graph& g) {
  const Index n = g.num_vertices();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<Index>> components;
  for (Index start = 0; start < n; ++start) {
    if (seen[start]) continue;
    std::vector<Index> members;
    std::queue<Index> frontier;
    frontier.push(start);
    seen[start] = 1;
    while (!frontier.empty()) {
      const Index v = frontier.front();
      frontier.pop();
      members.push_back(v);
      for (Index w : g.neighbors(v)) {
        if (!seen[w]) {
          seen[w] = 1;
          frontier.push(w);
        }
      }
    }
    std::sort(members.begin(), members.end());
    components.push_back(std::move(members));
  }
  return components;
}

bool is_connected(const Graph& g) { return connected_components(g).size() <= 1; }

Graph induced_subgraph(const Graph& g, std::span<const Index> vertices) {
  std::vector<Index> remap(static_cast<std::size_t>(g.num_vertices()), -1);
  for (std::size_t i = 0; i < vertices.size(); ++i) remap[vertices[i]] = static_cast<Index>(i);
  std::vector<Edge> edges;
  for (const auto& e : g.edges()) {
    if (remap[e.u] >= 0 && remap[e.v] >= 0) edges.push_back(make_edge(remap[e.u], remap[e.v]));
  }
  return Graph(static_cast<Index>(vertices.size()), edges);
}

}  // namespace rida
