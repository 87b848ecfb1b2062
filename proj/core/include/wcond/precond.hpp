#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wcond/matrix.hpp"

namespace wcond {

enum class PrecondKind { jacobi, row_equilibration, column_equilibration, custom };
enum class Side { left, right };

std::string_view to_string(PrecondKind kind);

/// Diagonal scaling applied from the left (rows) or the right (columns).
///
/// Entries must be finite and strictly positive; the jacobi kind only requires
/// them to be nonzero since diag(A)^-1 can be negative.
class DiagonalPreconditioner {
 public:
  DiagonalPreconditioner(std::vector<double> diag, Side side, PrecondKind kind);

  static DiagonalPreconditioner identity(std::size_t n, Side side = Side::left);

  const std::vector<double>& diag() const noexcept { return diag_; }
  Side side() const noexcept { return side_; }
  PrecondKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return diag_.size(); }

  /// P*A for left preconditioners, A*P for right ones.
  Matrix apply(const Matrix& a) const;
  Matrix as_matrix() const { return Matrix::diagonal(diag_); }

 private:
  std::vector<double> diag_;
  Side side_;
  PrecondKind kind_;
};

struct LeftScaled {
  DiagonalPreconditioner precond;
  Matrix result;
  /// Indices whose norm was clamped up to the floor.
  std::vector<std::size_t> floored;
};

struct RightScaled {
  Matrix result;
  DiagonalPreconditioner precond;
  std::vector<std::size_t> floored;
};

struct TwoSided {
  DiagonalPreconditioner left;
  Matrix result;
  DiagonalPreconditioner right;
};

/// E = diag(1/||A_i:||), returns (E, EA). A zero row throws ZeroRowError
/// unless `floor` > 0, in which case norms are clamped to max(norm, floor).
LeftScaled row_equilibrate(const Matrix& a, double floor = 0.0);

/// C = diag(1/||A_:j||), returns (AC, C).
RightScaled column_equilibrate(const Matrix& a, double floor = 0.0);

/// E from A, then C from EA; returns (E, EAC, C).
TwoSided row_column_equilibrate(const Matrix& a);

/// D = diag(A)^-1 for square A; returns (D, DA).
LeftScaled jacobi_precondition(const Matrix& a);

struct VdsTrial {
  double kappa_ea;
  double kappa_pa;
};

/// Condition numbers of the row-equilibrated EA and of PA for the same A.
/// Propagates RankDeficientError from condition_number.
VdsTrial vds_trial(const Matrix& a, const DiagonalPreconditioner& p,
                   double rank_tol = 1e-12);

struct ConditioningReport {
  double kappa_before;
  double kappa_after;
  PrecondKind kind;
  std::size_t rows;
  std::size_t cols;
  std::uint64_t seed = 0;
};

/// kappa(A) against kappa of A preconditioned by `kind` (row, column, or jacobi;
/// custom is rejected).
ConditioningReport conditioning_report(const Matrix& a, PrecondKind kind,
                                       std::uint64_t seed = 0);

inline constexpr std::string_view kConditioningReportHeader =
    "kind,rows,cols,kappa_before,kappa_after,seed";
std::string to_csv_row(const ConditioningReport& r);

}  // namespace wcond
