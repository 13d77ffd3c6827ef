#include "rida/graphio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "rida/random.hpp"
#include "textio.hpp"

namespace rida {

namespace fs = std::filesystem;
using detail::parse_number;

int Dataset::num_classes() const {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

namespace {

void expect_fields(const std::vector<std::string_view>& fields, std::size_t count, const std::string& file,
                   std::size_t line_no) {
  if (fields.size() != count) {
    throw ParseError(file, line_no,
                     "expected " + std::to_string(count) + " tab-separated fields, got " + std::to_string(fields.size()));
  }
}

AttributeMatrix read_attributes(const fs::path& file) {
  auto in = detail::open_input(file);
  const std::string name = file.string();
  std::string header;
  if (!std::getline(in, header)) throw ParseError(name, 1, "missing 'n<TAB>d' header");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  const auto head = detail::split_fields(header);
  expect_fields(head, 2, name, 1);
  const auto n = parse_number<Index>(head[0], name, 1);
  const auto d = parse_number<Index>(head[1], name, 1);
  if (n < 0 || d < 0) throw ValidationError(name + ": negative dimensions in header");

  MatrixXd values = MatrixXd::Zero(n, d);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> seen =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Constant(n, d, false);
  detail::for_each_line(
      in,
      [&](const auto& fields, std::size_t line_no) {
        expect_fields(fields, 3, name, line_no);
        const auto v = parse_number<Index>(fields[0], name, line_no);
        const auto j = parse_number<Index>(fields[1], name, line_no);
        const auto value = parse_number<double>(fields[2], name, line_no);
        if (v < 0 || v >= n || j < 0 || j >= d) {
          throw ValidationError(name + ":" + std::to_string(line_no) + ": entry (" + std::to_string(v) + ", " +
                                std::to_string(j) + ") out of range");
        }
        if (!std::isfinite(value)) throw ValidationError(name + ":" + std::to_string(line_no) + ": non-finite value");
        if (seen(v, j)) {
          throw ValidationError(name + ":" + std::to_string(line_no) + ": duplicate entry (" + std::to_string(v) + ", " +
                                std::to_string(j) + ")");
        }
        seen(v, j) = true;
        values(v, j) = value;
      },
      2);
  return AttributeMatrix(std::move(values));
}

Labels read_labels(const fs::path& file, Index n) {
  auto in = detail::open_input(file);
  const std::string name = file.string();
  Labels labels(static_cast<std::size_t>(n), -1);
  detail::for_each_line(in, [&](const auto& fields, std::size_t line_no) {
    expect_fields(fields, 2, name, line_no);
    const auto v = parse_number<Index>(fields[0], name, line_no);
    const auto label = parse_number<int>(fields[1], name, line_no);
    if (v < 0 || v >= n) throw ValidationError(name + ":" + std::to_string(line_no) + ": vertex out of range");
    if (label < 0) throw ValidationError(name + ":" + std::to_string(line_no) + ": negative label");
    if (labels[v] != -1) throw ValidationError(name + ":" + std::to_string(line_no) + ": duplicate label line");
    labels[v] = label;
  });
  for (Index v = 0; v < n; ++v) {
    if (labels[v] < 0) throw ValidationError(name + ": no label for vertex " + std::to_string(v));
  }
  return labels;
}

}  // namespace

Graph read_edges(const fs::path& file, Index num_vertices) {
  auto in = detail::open_input(file);
  const std::string name = file.string();
  std::vector<Edge> edges;
  detail::for_each_line(in, [&](const auto& fields, std::size_t line_no) {
    expect_fields(fields, 2, name, line_no);
    const auto u = parse_number<Index>(fields[0], name, line_no);
    const auto v = parse_number<Index>(fields[1], name, line_no);
    if (u == v) throw ValidationError(name + ":" + std::to_string(line_no) + ": self-loop at vertex " + std::to_string(u));
    if (u < 0 || v < 0 || u >= num_vertices || v >= num_vertices) {
      throw ValidationError(name + ":" + std::to_string(line_no) + ": vertex id out of range");
    }
    edges.push_back({u, v});
  });
  return Graph(num_vertices, edges);
}

void write_edges(const Graph& g, const fs::path& file) {
  auto out = detail::open_output(file);
  for (const auto& e : g.edges()) out << e.u << '\t' << e.v << '\n';
  if (!out) throw IoError("write failed: " + file.string());
}

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw NotFoundError("dataset directory not found: " + dir.string());
  Dataset data;
  data.attributes = read_attributes(dir / "attrs.tsv");
  const Index n = data.attributes.rows();
  data.graph = read_edges(dir / "edges.tsv", n);
  data.labels = read_labels(dir / "labels.tsv", n);
  return data;
}

void save_dataset(const Dataset& data, const fs::path& dir) {
  fs::create_directories(dir);
  write_edges(data.graph, dir / "edges.tsv");
  {
    auto out = detail::open_output(dir / "attrs.tsv");
    const auto& x = data.attributes;
    out << x.rows() << '\t' << x.cols() << '\n';
    for (Index v = 0; v < x.rows(); ++v) {
      for (Index j = 0; j < x.cols(); ++j) {
        if (x.mask(v, j) && x.values(v, j) != 0.0) out << v << '\t' << j << '\t' << detail::format_double(x.values(v, j)) << '\n';
      }
    }
  }
  auto out = detail::open_output(dir / "labels.tsv");
  for (std::size_t v = 0; v < data.labels.size(); ++v) out << v << '\t' << data.labels[v] << '\n';
}

std::vector<Index> largest_component_vertices(const Graph& g) {
  auto components = connected_components(g);
  if (components.empty()) return {};
  // Components are ordered by smallest member, so the first maximum wins ties.
  auto best = std::max_element(components.begin(), components.end(),
                               [](const auto& a, const auto& b) { return a.size() < b.size(); });
  return *best;
}

Dataset largest_connected_component(const Dataset& data) {
  const auto keep = largest_component_vertices(data.graph);
  Dataset out;
  out.graph = induced_subgraph(data.graph, keep);
  const auto k = static_cast<Index>(keep.size());
  out.attributes.values.resize(k, data.attributes.cols());
  out.attributes.mask.resize(k, data.attributes.cols());
  out.labels.resize(keep.size());
  for (Index i = 0; i < k; ++i) {
    out.attributes.values.row(i) = data.attributes.values.row(keep[i]);
    out.attributes.mask.row(i) = data.attributes.mask.row(keep[i]);
    out.labels[i] = data.labels[keep[i]];
  }
  return out;
}

LabeledSplit split_labels(const Labels& labels, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ValidationError("label fraction must lie in (0, 1)");
  const auto n = static_cast<Index>(labels.size());
  // Guard against 0.1 * 2485 landing a hair under 248.5.
  const auto count = static_cast<Index>(std::floor(fraction * static_cast<double>(n) + 0.5 + 1e-9));

  std::vector<Index> order(labels.size());
  for (Index v = 0; v < n; ++v) order[v] = v;
  Rng rng(seed);
  rng.shuffle(order);

  LabeledSplit split;
  split.labels = labels;
  split.num_classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  split.train_idx.assign(order.begin(), order.begin() + count);
  split.test_idx.assign(order.begin() + count, order.end());
  std::sort(split.train_idx.begin(), split.train_idx.end());
  std::sort(split.test_idx.begin(), split.test_idx.end());
  if (count < split.num_classes) {
    split.warnings.push_back("labeled set has " + std::to_string(count) + " vertices but there are " +
                             std::to_string(split.num_classes) + " classes");
  }
  return split;
}

AttributeMatrix row_normalize_attributes(const AttributeMatrix& x) {
  AttributeMatrix out = x;
  for (Index v = 0; v < x.rows(); ++v) {
    double total = 0.0;
    for (Index j = 0; j < x.cols(); ++j) {
      if (x.mask(v, j)) total += std::abs(x.values(v, j));
    }
    for (Index j = 0; j < x.cols(); ++j) {
      out.values(v, j) = (x.mask(v, j) && total > 0.0) ? x.values(v, j) / total : 0.0;
    }
  }
  return out;
}

}  // namespace rida
