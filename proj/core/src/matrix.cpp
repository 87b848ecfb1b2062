#include "wcond/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wcond {

namespace {

void check_dims(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw InvalidArgument("Matrix: dimensions must be positive, got " + std::to_string(rows) +
                          "x" + std::to_string(cols));
  }
  if (rows > Matrix::kMaxDim || cols > Matrix::kMaxDim) {
    throw InvalidArgument("Matrix: dimensions capped at 4096, got " + std::to_string(rows) + "x" +
                          std::to_string(cols));
  }
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument(std::string(op) + ": shape mismatch");
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
  check_dims(rows, cols);
  data_.assign(rows * cols, 0.0);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  check_dims(rows, cols);
  if (data_.size() != rows * cols) {
    throw InvalidArgument("Matrix: data length " + std::to_string(data_.size()) +
                          " != rows*cols " + std::to_string(rows * cols));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) throw NonFiniteError("Matrix", i);
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  check_dims(rows_, cols_);
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw InvalidArgument("Matrix: ragged initializer");
    for (double v : r) {
      if (!std::isfinite(v)) throw NonFiniteError("Matrix", data_.size());
      data_.push_back(v);
    }
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d[i])) throw NonFiniteError("Matrix::diagonal", i);
    m(i, i) = d[i];
  }
  return m;
}

Vector Matrix::column(std::size_t j) const {
  Vector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw InvalidArgument("matmul: inner dimensions differ (" + std::to_string(a.cols()) +
                          " vs " + std::to_string(b.rows()) + ")");
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto crow = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw InvalidArgument("matvec: dimension mismatch");
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "operator-");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] -= bd[i];
  return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "operator+");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] += bd[i];
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (double& v : c.data()) v *= s;
  return c;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) {
  // Scaled accumulation so that tiny or huge rows do not under/overflow.
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double v : a) {
    const double r = v / scale;
    s += r * r;
  }
  return scale * std::sqrt(s);
}

double frobenius_norm(const Matrix& a) { return norm2(a.data()); }

Vector row_norms2(const Matrix& a) {
  Vector n(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) n[i] = norm2(a.row(i));
  return n;
}

Vector col_norms2(const Matrix& a) {
  Vector n(a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) n[j] = norm2(a.column(j));
  return n;
}

Matrix scale_rows(const Matrix& a, std::span<const double> d) {
  if (d.size() != a.rows()) throw InvalidArgument("scale_rows: length mismatch");
  Matrix c = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (double& v : c.row(i)) v *= d[i];
  return c;
}

Matrix scale_cols(const Matrix& a, std::span<const double> d) {
  if (d.size() != a.cols()) throw InvalidArgument("scale_cols: length mismatch");
  Matrix c = a;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = c.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) r[j] *= d[j];
  }
  return c;
}

Vector solve_spd(const Matrix& a, std::span<const double> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw InvalidArgument("solve_spd: matrix not square");
  if (b.size() != n) throw InvalidArgument("solve_spd: rhs length mismatch");

  const double fro = frobenius_norm(a);
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = a(i, j) - a(j, i);
      asym += 2.0 * d * d;
    }
  if (std::sqrt(asym) > 1e-12 * fro) {
    throw NotSpdError("solve_spd: symmetry check failed (matrix is not symmetric)");
  }

  // Lower Cholesky factor, stored densely.
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) {
      throw NotSpdError("solve_spd: Cholesky failed (not positive definite) at pivot " +
                        std::to_string(j));
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }

  Vector y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) y[i] -= l(i, k) * y[k];
    y[i] /= l(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t k = ii + 1; k < n; ++k) y[ii] -= l(k, ii) * y[k];
    y[ii] /= l(ii, ii);
  }

#ifdef WCOND_CHECK_RESIDUALS
  const Vector r = matvec(a, y);
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) res += (r[i] - b[i]) * (r[i] - b[i]);
  if (std::sqrt(res) > 1e-9 * std::max(1.0, norm2(b))) {
    throw NotSpdError("solve_spd: residual check failed");
  }
#endif
  return y;
}

}  // namespace wcond
