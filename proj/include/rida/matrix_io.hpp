#pragma once

#include <istream>
#include <ostream>

#include "rida/types.hpp"

namespace rida {

/// "rows cols" header line, then one line per row of space-separated values.
void write_matrix(std::ostream& out, const MatrixXd& m);
MatrixXd read_matrix(std::istream& in);

}  // namespace rida
