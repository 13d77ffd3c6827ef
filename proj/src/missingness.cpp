#include "rida/missingness.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rida/random.hpp"
#include "textio.hpp"

namespace rida {

void MissingnessSpec::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("--alpha must lie in [0, 1], got " + std::to_string(alpha));
  if (!(beta >= 0.0 && beta <= 1.0)) throw ValidationError("--beta must lie in [0, 1], got " + std::to_string(beta));
}

Index MissingnessSpec::affected_vertices(Index n) const {
  return static_cast<Index>(std::floor(beta * static_cast<double>(n)));
}

Index MissingnessSpec::missing_per_vertex(Index d) const {
  return static_cast<Index>(std::floor(alpha * static_cast<double>(d)));
}

AttributeMatrix apply_missingness(const AttributeMatrix& x, const MissingnessSpec& spec) {
  spec.validate();
  if (!x.is_complete()) throw ValidationError("apply_missingness expects a fully observed matrix");
  const Index n = x.rows();
  const Index d = x.cols();
  const Index per_vertex = spec.missing_per_vertex(d);

  Rng rng(spec.seed);
  auto affected = rng.sample_without_replacement(n, spec.affected_vertices(n));
  std::sort(affected.begin(), affected.end());

  AttributeMatrix out = x;
  for (const auto v : affected) {
    for (const auto j : rng.sample_without_replacement(d, per_vertex)) {
      out.mask(v, j) = false;
      out.values(v, j) = 0.0;
    }
  }
  return out;
}

void save_mask(const AttributeMatrix& x, const std::filesystem::path& file, bool allow_empty) {
  if (x.is_complete() && !allow_empty) {
    throw ValidationError("mask has no missing entries; pass the empty-mask flag to write it anyway");
  }
  auto out = detail::open_output(file);
  for (Index v = 0; v < x.rows(); ++v) {
    for (Index j = 0; j < x.cols(); ++j) {
      if (!x.mask(v, j)) out << v << '\t' << j << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + file.string());
}

AttributeMatrix load_mask(const AttributeMatrix& complete, const std::filesystem::path& file) {
  auto in = detail::open_input(file);
  const std::string name = file.string();
  AttributeMatrix out = complete;
  out.mask.setConstant(true);
  detail::for_each_line(in, [&](const auto& fields, std::size_t line_no) {
    if (fields.size() != 2) throw ParseError(name, line_no, "expected 'v<TAB>j'");
    const auto v = detail::parse_number<Index>(fields[0], name, line_no);
    const auto j = detail::parse_number<Index>(fields[1], name, line_no);
    if (v < 0 || v >= out.rows() || j < 0 || j >= out.cols()) {
      throw ValidationError(name + ":" + std::to_string(line_no) + ": entry (" + std::to_string(v) + ", " +
                            std::to_string(j) + ") out of range");
    }
    if (!out.mask(v, j)) throw ValidationError(name + ":" + std::to_string(line_no) + ": duplicate mask entry");
    out.mask(v, j) = false;
    out.values(v, j) = 0.0;
  });
  return out;
}

}  // namespace rida
