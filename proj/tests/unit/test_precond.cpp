#include <gtest/gtest.h>

#include <cmath>

#include "wcond/errors.hpp"
#include "wcond/precond.hpp"
#include "wcond/rng.hpp"
#include "wcond/svd.hpp"

using namespace wcond;

namespace {

void expect_near(const Matrix& a, const Matrix& b, double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) EXPECT_NEAR(a(i, j), b(i, j), tol) << i << "," << j;
}

}  // namespace

TEST(RowEquilibrate, Examples) {
  const auto r = row_equilibrate(Matrix{{3, 4}, {0, 5}});
  EXPECT_EQ(r.precond.kind(), PrecondKind::row_equilibration);
  EXPECT_EQ(r.precond.side(), Side::left);
  EXPECT_DOUBLE_EQ(r.precond.diag()[0], 0.2);
  EXPECT_DOUBLE_EQ(r.precond.diag()[1], 0.2);
  expect_near(r.result, Matrix{{0.6, 0.8}, {0, 1}}, 1e-15);

  const auto id = row_equilibrate(Matrix::identity(4));
  EXPECT_EQ(id.result, Matrix::identity(4));
  EXPECT_EQ(id.precond.as_matrix(), Matrix::identity(4));

  const Matrix d{{1, 0}, {0, 100}};
  const auto rd = row_equilibrate(d);
  EXPECT_EQ(rd.result, Matrix::identity(2));
  EXPECT_DOUBLE_EQ(condition_number(d), 100.0);
  EXPECT_DOUBLE_EQ(condition_number(rd.result), 1.0);
}

TEST(RowEquilibrate, ZeroRowAndFloor) {
  const Matrix a{{1, 2}, {0, 0}, {3, 4}};
  try {
    row_equilibrate(a);
    FAIL();
  } catch (const ZeroRowError& e) {
    EXPECT_EQ(e.index(), 1u);
  }
  const auto f = row_equilibrate(a, 1e-12);
  ASSERT_EQ(f.floored.size(), 1u);
  EXPECT_EQ(f.floored[0], 1u);
  EXPECT_DOUBLE_EQ(f.precond.diag()[1], 1e12);
  EXPECT_THROW(row_equilibrate(a, -1.0), InvalidArgument);
}

TEST(RowEquilibrate, UnitRowsAndIdempotence) {
  Rng rng(21);
  for (int t = 0; t < 500; ++t) {
    const std::size_t r = 1 + rng.below(20), c = 1 + rng.below(20);
    const Matrix a = rng.uniform_matrix(r, c, -1, 1);
    const auto eq = row_equilibrate(a);
    for (double n : row_norms2(eq.result)) ASSERT_NEAR(n, 1.0, 1e-12);
    const auto again = row_equilibrate(eq.result);
    const Matrix diff = again.precond.as_matrix() - Matrix::identity(r);
    ASSERT_LE(frobenius_norm(diff), 1e-12);
  }
}

TEST(ColumnEquilibrate, ExamplesAndMirror) {
  const auto c = column_equilibrate(Matrix{{3, 0}, {4, 5}});
  EXPECT_DOUBLE_EQ(c.precond.diag()[0], 0.2);
  EXPECT_DOUBLE_EQ(c.precond.diag()[1], 0.2);
  EXPECT_EQ(c.precond.side(), Side::right);
  EXPECT_EQ(column_equilibrate(Matrix::identity(3)).result, Matrix::identity(3));

  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const Matrix a = rng.normal_matrix(1 + rng.below(9), 1 + rng.below(9));
    const auto col = column_equilibrate(a);
    const auto row = row_equilibrate(transpose(a));
    EXPECT_EQ(col.result, transpose(row.result));
    EXPECT_EQ(col.precond.diag(), row.precond.diag());
    for (double n : col_norms2(col.result)) EXPECT_NEAR(n, 1.0, 1e-12);
  }
}

TEST(RowColumnEquilibrate, Examples) {
  const auto id = row_column_equilibrate(Matrix::identity(3));
  EXPECT_EQ(id.result, Matrix::identity(3));
  EXPECT_EQ(id.left.as_matrix(), Matrix::identity(3));
  EXPECT_EQ(id.right.as_matrix(), Matrix::identity(3));
  EXPECT_EQ(row_column_equilibrate(Matrix{{1, 0}, {0, 100}}).result, Matrix::identity(2));

  // C is built from EA, so EAC has unit columns (rows are only approximately unit).
  Rng rng(8);
  const Matrix a = rng.normal_matrix(8, 8);
  const auto rc = row_column_equilibrate(a);
  for (double n : col_norms2(rc.result)) EXPECT_NEAR(n, 1.0, 1e-12);
  const Matrix ea = row_equilibrate(a).result;
  EXPECT_EQ(rc.right.diag(), column_equilibrate(ea).precond.diag());
}

TEST(RowColumnEquilibrate, StageAttribution) {
  try {
    row_column_equilibrate(Matrix{{1, 0}, {0, 0}});
    FAIL();
  } catch (const ZeroRowError& e) {
    EXPECT_NE(std::string(e.what()).find("row stage"), std::string::npos);
  }
  // A zero column survives row equilibration and is caught at the column stage.
  try {
    row_column_equilibrate(Matrix{{1, 0}, {2, 0}});
    FAIL();
  } catch (const ZeroRowError& e) {
    EXPECT_NE(std::string(e.what()).find("column stage"), std::string::npos);
    EXPECT_EQ(e.index(), 1u);
  }
}

TEST(Jacobi, Examples) {
  EXPECT_EQ(jacobi_precondition(Matrix{{2, 0}, {0, 5}}).result, Matrix::identity(2));
  EXPECT_EQ(jacobi_precondition(Matrix::identity(3)).result, Matrix::identity(3));
  const auto j = jacobi_precondition(Matrix{{4, 1}, {1, 3}});
  EXPECT_DOUBLE_EQ(j.precond.diag()[0], 0.25);
  EXPECT_DOUBLE_EQ(j.precond.diag()[1], 1.0 / 3.0);
  expect_near(j.result, Matrix{{1, 0.25}, {1.0 / 3.0, 1}}, 1e-15);
  // Negative diagonals are allowed for this kind only.
  const auto neg = jacobi_precondition(Matrix{{-2, 1}, {1, 3}});
  EXPECT_DOUBLE_EQ(neg.precond.diag()[0], -0.5);
  EXPECT_THROW(jacobi_precondition(Matrix(2, 3)), InvalidArgument);
  try {
    jacobi_precondition(Matrix{{1, 1}, {1, 0}});
    FAIL();
  } catch (const ZeroRowError& e) {
    EXPECT_EQ(e.index(), 1u);
  }
}

TEST(DiagonalPreconditioner, Validation) {
  EXPECT_THROW(DiagonalPreconditioner({1.0, -1.0}, Side::left, PrecondKind::custom),
               InvalidArgument);
  EXPECT_THROW(DiagonalPreconditioner({1.0, 0.0}, Side::left, PrecondKind::row_equilibration),
               InvalidArgument);
  EXPECT_THROW(DiagonalPreconditioner({}, Side::left, PrecondKind::custom), InvalidArgument);
  EXPECT_NO_THROW(DiagonalPreconditioner({-1.0}, Side::left, PrecondKind::jacobi));
}

TEST(Vds, TrivialCases) {
  Rng rng(12);
  const Matrix a = rng.normal_matrix(6, 6);
  const auto e = row_equilibrate(a).precond;
  const auto same = vds_trial(a, e);
  EXPECT_DOUBLE_EQ(same.kappa_ea, same.kappa_pa);
  std::vector<double> scaled = e.diag();
  for (auto& d : scaled) d *= 17.0;
  const auto s = vds_trial(a, DiagonalPreconditioner(scaled, Side::left, PrecondKind::custom));
  EXPECT_NEAR(s.kappa_pa, s.kappa_ea, 1e-12 * s.kappa_ea);
  EXPECT_THROW(vds_trial(a, DiagonalPreconditioner::identity(5)), InvalidArgument);
}

TEST(Vds, SqrtNBoundHolds) {
  Rng rng(99);
  for (int t = 0; t < 200; ++t) {
    const Matrix a = rng.normal_matrix(16, 16);
    std::vector<double> p(16);
    for (auto& d : p) d = rng.log_uniform(1e-3, 1e3);
    const auto r = vds_trial(a, DiagonalPreconditioner(p, Side::left, PrecondKind::custom));
    EXPECT_LE(r.kappa_ea, 4.0 * r.kappa_pa);
  }
}

TEST(EquilibrationBound, EqualityWitness) {
  const Matrix a{{3, 4}, {0, 5}};
  const double ka = condition_number(a);
  const double kea = condition_number(row_equilibrate(a).result);
  EXPECT_NEAR(ka, 3.0, 1e-12);
  EXPECT_NEAR(kea, 3.0, 1e-12);
}

TEST(ConditioningReport, CsvRow) {
  const auto r = conditioning_report(Matrix{{1, 0}, {0, 100}}, PrecondKind::row_equilibration, 5);
  EXPECT_DOUBLE_EQ(r.kappa_before, 100.0);
  EXPECT_DOUBLE_EQ(r.kappa_after, 1.0);
  EXPECT_EQ(to_csv_row(r), "row_equilibration,2,2,100,1,5");
  EXPECT_THROW(conditioning_report(Matrix::identity(2), PrecondKind::custom), InvalidArgument);
}
