#pragma once

#include <vector>

#include "wcond/matrix.hpp"

namespace wcond {

/// Thin SVD: a = u * diag(sigma) * vt with k = min(rows, cols).
struct SvdResult {
  Matrix u;                   // rows x k, orthonormal columns
  std::vector<double> sigma;  // k values, descending, non-negative
  Matrix vt;                  // k x cols, orthonormal rows
  int sweeps = 0;
};

/// One-sided (Hestenes) Jacobi SVD.
///
/// Columns are rotated pairwise until every pair is orthogonal to relative
/// precision |<a_i, a_j>| <= 1e-15 * ||a_i|| ||a_j||; this yields singular
/// values with high relative accuracy even when the spread is large. At most
/// 60 cyclic sweeps; ConvergenceError beyond that.
SvdResult svd(const Matrix& a);

/// Singular values only (same algorithm, skips accumulating V).
std::vector<double> singular_values(const Matrix& a);

inline constexpr double kDefaultRankTol = 1e-12;

/// sigma_1 / sigma_k. Throws RankDeficientError when sigma_k <= rank_tol * sigma_1.
double condition_number(const Matrix& a, double rank_tol = kDefaultRankTol);

/// Same as condition_number but from precomputed descending singular values.
double condition_from_sigma(const std::vector<double>& sigma, double rank_tol = kDefaultRankTol);

}  // namespace wcond
