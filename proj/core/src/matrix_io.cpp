#include "wcond/matrix_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace wcond {

namespace {

bool next_content_line(std::istream& in, std::string& line, std::size_t& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

Matrix read_matrix(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!next_content_line(in, line, lineno)) throw InvalidArgument("read_matrix: missing header");

  std::istringstream header(line);
  long long rows = 0;
  long long cols = 0;
  std::string extra;
  if (!(header >> rows >> cols) || (header >> extra) || rows <= 0 || cols <= 0) {
    throw InvalidArgument("read_matrix: header must be `rows cols` with positive integers");
  }

  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(rows * cols));
  for (long long r = 0; r < rows; ++r) {
    if (!next_content_line(in, line, lineno)) {
      throw InvalidArgument("read_matrix: expected " + std::to_string(rows) + " rows, got " +
                            std::to_string(r));
    }
    std::istringstream row(line);
    std::string tok;
    long long count = 0;
    while (row >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) {
        throw InvalidArgument("read_matrix: bad number '" + tok + "' on line " +
                              std::to_string(lineno));
      }
      data.push_back(v);
      ++count;
    }
    if (count != cols) {
      throw InvalidArgument("read_matrix: ragged row on line " + std::to_string(lineno) +
                            " (expected " + std::to_string(cols) + " values, got " +
                            std::to_string(count) + ")");
    }
  }
  if (next_content_line(in, line, lineno)) {
    throw InvalidArgument("read_matrix: trailing data on line " + std::to_string(lineno));
  }
  return Matrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), std::move(data));
}

Matrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("read_matrix_file: cannot open " + path);
  return read_matrix(in);
}

void write_matrix(std::ostream& out, const Matrix& m) {
  const auto old_prec = out.precision(17);
  out << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << m(i, j);
    }
    out << '\n';
  }
  out.precision(old_prec);
}

}  // namespace wcond
