#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wcond/matrix.hpp"
#include "wcond/net/layer.hpp"

namespace wcond::net {

struct Dataset {
  Matrix x;  // N x input_width
  Matrix y;  // N x output_width

  std::size_t size() const noexcept { return x.rows(); }
  Dataset subset(std::span<const std::size_t> rows) const;
};

struct TeacherSpec {
  std::size_t samples = 256;
  std::size_t in_dim = 4;
  std::size_t hidden = 8;
  std::size_t out_dim = 1;
  /// Target condition number of the teacher's first weight matrix, reached by
  /// scaling its rows geometrically.
  double teacher_kappa = 1e3;
  double noise = 0.0;
  Activation activation = Activation::tanh;
};

struct TeacherStudent {
  Dataset data;
  Matrix teacher_w1;
  double teacher_kappa = 0.0;  // achieved kappa(teacher_w1)
};

/// Regression data y = phi(X W1 + b1) W2 + b2 (+ noise), X standard normal.
TeacherStudent teacher_student(const TeacherSpec& spec, std::uint64_t seed);

/// Two interleaved half circles in 2-D with labels 0/1 and Gaussian jitter.
Dataset two_moons(std::size_t samples, double noise, std::uint64_t seed);

/// y = X W + b exactly, X standard normal; W, b standard normal.
Dataset linear_dataset(std::size_t samples, std::size_t in_dim, std::size_t out_dim,
                       std::uint64_t seed);

/// Scales the rows of `g` by r^(-i/(n-1)) with r found by bisection so that
/// kappa(result) matches `target` to 1e-9 relative.
Matrix imbalance_rows_to_kappa(const Matrix& g, double target);

}  // namespace wcond::net
