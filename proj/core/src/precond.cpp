#include "wcond/precond.hpp"

#include <cmath>
#include <sstream>

#include "wcond/svd.hpp"

namespace wcond {

std::string_view to_string(PrecondKind kind) {
  switch (kind) {
    case PrecondKind::jacobi: return "jacobi";
    case PrecondKind::row_equilibration: return "row_equilibration";
    case PrecondKind::column_equilibration: return "column_equilibration";
    case PrecondKind::custom: return "custom";
  }
  return "unknown";
}

DiagonalPreconditioner::DiagonalPreconditioner(std::vector<double> diag, Side side,
                                               PrecondKind kind)
    : diag_(std::move(diag)), side_(side), kind_(kind) {
  if (diag_.empty()) throw InvalidArgument("DiagonalPreconditioner: empty diagonal");
  for (std::size_t i = 0; i < diag_.size(); ++i) {
    const double d = diag_[i];
    if (!std::isfinite(d)) throw NonFiniteError("DiagonalPreconditioner", i);
    const bool ok = kind_ == PrecondKind::jacobi ? d != 0.0 : d > 0.0;
    if (!ok) {
      throw InvalidArgument("DiagonalPreconditioner: entry " + std::to_string(i) +
                            (kind_ == PrecondKind::jacobi ? " is zero" : " is not positive"));
    }
  }
}

DiagonalPreconditioner DiagonalPreconditioner::identity(std::size_t n, Side side) {
  return DiagonalPreconditioner(std::vector<double>(n, 1.0), side, PrecondKind::custom);
}

Matrix DiagonalPreconditioner::apply(const Matrix& a) const {
  return side_ == Side::left ? scale_rows(a, diag_) : scale_cols(a, diag_);
}

namespace {

std::vector<double> inverse_norms(const std::vector<double>& norms, double floor,
                                  const char* stage, std::vector<std::size_t>& floored) {
  if (floor < 0.0) throw InvalidArgument(std::string(stage) + ": floor must be >= 0");
  std::vector<double> inv(norms.size());
  for (std::size_t i = 0; i < norms.size(); ++i) {
    double n = norms[i];
    if (n < floor) {
      n = floor;
      floored.push_back(i);
    }
    if (n == 0.0) throw ZeroRowError(stage, i);
    inv[i] = 1.0 / n;
  }
  return inv;
}

}  // namespace

LeftScaled row_equilibrate(const Matrix& a, double floor) {
  std::vector<std::size_t> floored;
  auto inv = inverse_norms(row_norms2(a), floor, "row_equilibrate", floored);
  DiagonalPreconditioner e(std::move(inv), Side::left, PrecondKind::row_equilibration);
  Matrix ea = e.apply(a);
  return {std::move(e), std::move(ea), std::move(floored)};
}

RightScaled column_equilibrate(const Matrix& a, double floor) {
  std::vector<std::size_t> floored;
  auto inv = inverse_norms(col_norms2(a), floor, "column_equilibrate", floored);
  DiagonalPreconditioner c(std::move(inv), Side::right, PrecondKind::column_equilibration);
  Matrix ac = c.apply(a);
  return {std::move(ac), std::move(c), std::move(floored)};
}

TwoSided row_column_equilibrate(const Matrix& a) {
  std::vector<std::size_t> unused;
  auto rinv = inverse_norms(row_norms2(a), 0.0, "row_column_equilibrate[row stage]", unused);
  DiagonalPreconditioner e(std::move(rinv), Side::left, PrecondKind::row_equilibration);
  const Matrix ea = e.apply(a);
  auto cinv = inverse_norms(col_norms2(ea), 0.0, "row_column_equilibrate[column stage]", unused);
  DiagonalPreconditioner c(std::move(cinv), Side::right, PrecondKind::column_equilibration);
  Matrix eac = c.apply(ea);
  return {std::move(e), std::move(eac), std::move(c)};
}

LeftScaled jacobi_precondition(const Matrix& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("jacobi_precondition: matrix not square");
  std::vector<double> inv(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (a(i, i) == 0.0) throw ZeroRowError("jacobi_precondition: zero diagonal entry", i);
    inv[i] = 1.0 / a(i, i);
  }
  DiagonalPreconditioner d(std::move(inv), Side::left, PrecondKind::jacobi);
  Matrix da = d.apply(a);
  return {std::move(d), std::move(da), {}};
}

VdsTrial vds_trial(const Matrix& a, const DiagonalPreconditioner& p, double rank_tol) {
  if (p.side() != Side::left || p.size() != a.rows()) {
    throw InvalidArgument("vds_trial: need a left preconditioner of size rows(A)");
  }
  const auto eq = row_equilibrate(a);
  return {condition_number(eq.result, rank_tol), condition_number(p.apply(a), rank_tol)};
}

ConditioningReport conditioning_report(const Matrix& a, PrecondKind kind, std::uint64_t seed) {
  Matrix after = [&] {
    switch (kind) {
      case PrecondKind::row_equilibration: return row_equilibrate(a).result;
      case PrecondKind::column_equilibration: return column_equilibrate(a).result;
      case PrecondKind::jacobi: return jacobi_precondition(a).result;
      case PrecondKind::custom: break;
    }
    throw InvalidArgument("conditioning_report: custom kind has no construction rule");
  }();
  return {condition_number(a), condition_number(after), kind, a.rows(), a.cols(), seed};
}

std::string to_csv_row(const ConditioningReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << to_string(r.kind) << ',' << r.rows << ',' << r.cols << ',' << r.kappa_before << ','
     << r.kappa_after << ',' << r.seed;
  return os.str();
}

}  // namespace wcond
