#pragma once

#include <cstdint>
#include <filesystem>

#include "rida/graphio.hpp"

namespace rida {

/// alpha: fraction of attributes removed per affected vertex.
/// beta: fraction of vertices affected.
struct MissingnessSpec {
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  Index affected_vertices(Index n) const;
  Index missing_per_vertex(Index d) const;
};

/// Marks floor(beta*n) uniformly chosen vertices as incomplete, each losing
/// floor(alpha*d) uniformly chosen positions; values at those positions are
/// zeroed. Vertices are drawn first, then positions per vertex in ascending
/// vertex order.
AttributeMatrix apply_missingness(const AttributeMatrix& x, const MissingnessSpec& spec);

/// Writes "v<TAB>j" for every missing entry in row-major order. An all-observed
/// matrix is refused unless `allow_empty` is set.
void save_mask(const AttributeMatrix& x, const std::filesystem::path& file, bool allow_empty = false);

/// Applies a mask file to a complete matrix.
AttributeMatrix load_mask(const AttributeMatrix& complete, const std::filesystem::path& file);

}  // namespace rida
