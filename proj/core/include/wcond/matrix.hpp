#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "wcond/errors.hpp"

namespace wcond {

using Vector = std::vector<double>;

/// Dense row-major double matrix.
///
/// Dimensions are positive and at most kMaxDim on each axis. Entries passed
/// in at construction must be finite; element access afterwards is unchecked.
class Matrix {
 public:
  static constexpr std::size_t kMaxDim = 4096;

  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  Vector column(std::size_t j) const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, std::span<const double> x);
Matrix transpose(const Matrix& a);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

double frobenius_norm(const Matrix& a);
/// 2-norm of each row.
Vector row_norms2(const Matrix& a);
/// 2-norm of each column.
Vector col_norms2(const Matrix& a);

/// diag(d) * a without forming diag(d).
Matrix scale_rows(const Matrix& a, std::span<const double> d);
/// a * diag(d).
Matrix scale_cols(const Matrix& a, std::span<const double> d);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

/// Solves a x = b for symmetric positive definite a via Cholesky.
/// Throws NotSpdError naming the failed check.
Vector solve_spd(const Matrix& a, std::span<const double> b);

}  // namespace wcond
