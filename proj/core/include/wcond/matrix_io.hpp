#pragma once

#include <iosfwd>
#include <string>

#include "wcond/matrix.hpp"

namespace wcond {

/// Text fixture format: a `rows cols` header line, then one
/// whitespace-separated row per line. Blank lines and lines starting with '#'
/// are skipped. Ragged rows are rejected.
Matrix read_matrix(std::istream& in);
Matrix read_matrix_file(const std::string& path);

/// Writes with 17 significant digits so that read_matrix round-trips exactly.
void write_matrix(std::ostream& out, const Matrix& m);

}  // namespace wcond
