#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wcond {

/// Dimension mismatches, empty inputs, out-of-range parameters.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The analytic gradient disagreed with finite differences (e.g. at a ReLU kink).
class GradientCheckError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Raised when sigma_min <= rank_tol * sigma_max.
class RankDeficientError : public std::runtime_error {
 public:
  RankDeficientError(double sigma_max, double sigma_min);

  double sigma_max() const noexcept { return sigma_max_; }
  double sigma_min() const noexcept { return sigma_min_; }

 private:
  double sigma_max_;
  double sigma_min_;
};

/// A row (or column) with zero 2-norm where equilibration needs a positive one.
class ZeroRowError : public std::runtime_error {
 public:
  ZeroRowError(const std::string& what_stage, std::size_t index);

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// solve_spd input failed the symmetry or Cholesky check.
class NotSpdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite value produced inside a computation (layer output, Hessian entry).
class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(const std::string& where, std::size_t index);

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wcond
