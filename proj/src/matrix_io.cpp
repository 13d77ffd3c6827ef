#include "rida/matrix_io.hpp"

#include <string>

#include "rida/dpgnn.hpp"
#include "textio.hpp"

namespace rida {

void write_matrix(std::ostream& out, const MatrixXd& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << detail::format_double(m(i, j));
    }
    out << '\n';
  }
}

MatrixXd read_matrix(std::istream& in) {
  Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) throw Error("matrix dump: bad 'rows cols' header");
  MatrixXd m(rows, cols);
  std::string token;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (!(in >> token)) throw Error("matrix dump: truncated data");
      m(i, j) = detail::parse_number<double>(token, "matrix dump", static_cast<std::size_t>(i + 2));
    }
  }
  return m;
}

void save_transform(const TransformParams<double>& p, const std::string& path) {
  auto out = detail::open_output(path);
  write_matrix(out, p.w2);
  write_matrix(out, p.b1);
  write_matrix(out, p.w1);
  write_matrix(out, p.b2);
  if (!out) throw IoError("write failed: " + path);
}

TransformParams<double> load_transform(const std::string& path) {
  auto in = detail::open_input(path);
  TransformParams<double> p;
  p.w2 = read_matrix(in);
  p.b1 = read_matrix(in);
  p.w1 = read_matrix(in);
  p.b2 = read_matrix(in);
  if (p.w2.cols() != p.b1.cols() || p.w1.rows() != p.w2.cols() || p.w1.cols() != p.b2.cols()) {
    throw ValidationError(path + ": inconsistent head shapes");
  }
  return p;
}

}  // namespace rida
