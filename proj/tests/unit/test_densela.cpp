#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "wcond/errors.hpp"
#include "wcond/matrix.hpp"
#include "wcond/matrix_io.hpp"
#include "wcond/rng.hpp"
#include "wcond/svd.hpp"

using namespace wcond;

namespace {

// Singular values of a 2x2 matrix from the characteristic polynomial of A^T A.
std::pair<double, double> sigma_2x2(double a, double b, double c, double d) {
  const double p = a * a + b * b + c * c + d * d;  // trace(A^T A)
  const double q = a * d - b * c;                  // det(A)
  const double disc = std::sqrt(p * p - 4.0 * q * q);
  return {std::sqrt((p + disc) / 2.0), std::sqrt((p - disc) / 2.0)};
}

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

Matrix reconstruct(const SvdResult& s) {
  Matrix us = s.u;
  for (std::size_t i = 0; i < us.rows(); ++i)
    for (std::size_t j = 0; j < us.cols(); ++j) us(i, j) *= s.sigma[j];
  return matmul(us, s.vt);
}

}  // namespace

TEST(Matrix, RejectsNonFiniteAndZeroDims) {
  EXPECT_THROW(Matrix(0, 3), InvalidArgument);
  EXPECT_THROW(Matrix(2, 1, {1.0, std::nan("")}), NonFiniteError);
  EXPECT_THROW(Matrix(1, 1, {INFINITY}), NonFiniteError);
  EXPECT_THROW(Matrix(2, 2, {1.0, 2.0, 3.0}), InvalidArgument);
  EXPECT_THROW(Matrix(Matrix::kMaxDim + 1, 1), InvalidArgument);
}

TEST(Matrix, MatmulIdentity) {
  const Matrix a{{1, 2}, {3, 4}};
  EXPECT_EQ(matmul(Matrix::identity(2), a), a);
  EXPECT_THROW(matmul(a, Matrix(3, 1)), InvalidArgument);
}

TEST(Matrix, NormsAndTranspose) {
  const Matrix a{{3, 4}, {0, 5}};
  EXPECT_EQ(row_norms2(a), (Vector{5.0, 5.0}));
  const auto c = col_norms2(a);
  EXPECT_DOUBLE_EQ(c[0], 3.0);
  EXPECT_DOUBLE_EQ(c[1], std::sqrt(41.0));
  EXPECT_EQ(transpose(a), (Matrix{{3, 0}, {4, 5}}));
  EXPECT_DOUBLE_EQ(frobenius_norm(a), std::sqrt(50.0));
}

TEST(Matrix, Norm2AvoidsOverflow) {
  const Vector v{3e200, 4e200};
  EXPECT_DOUBLE_EQ(norm2(v), 5e200);
}

TEST(SolveSpd, Examples) {
  const Vector x1 = solve_spd(Matrix::identity(3), Vector{1, 2, 3});
  EXPECT_EQ(x1, (Vector{1, 2, 3}));
  const Vector x2 = solve_spd(Matrix{{2, 0}, {0, 4}}, Vector{2, 8});
  EXPECT_NEAR(x2[0], 1.0, 1e-15);
  EXPECT_NEAR(x2[1], 2.0, 1e-15);
  const Vector x3 = solve_spd(Matrix{{4, 1}, {1, 3}}, Vector{1, 2});
  EXPECT_NEAR(x3[0], 1.0 / 11.0, 1e-15);
  EXPECT_NEAR(x3[1], 7.0 / 11.0, 1e-15);
}

TEST(SolveSpd, NamesFailedCheck) {
  try {
    solve_spd(Matrix{{1, 2}, {0, 1}}, Vector{1, 1});
    FAIL();
  } catch (const NotSpdError& e) {
    EXPECT_NE(std::string(e.what()).find("symmetric"), std::string::npos);
  }
  try {
    solve_spd(Matrix{{1, 2}, {2, 1}}, Vector{1, 1});
    FAIL();
  } catch (const NotSpdError& e) {
    EXPECT_NE(std::string(e.what()).find("positive"), std::string::npos);
  }
}

TEST(Svd, Examples) {
  EXPECT_EQ(svd(Matrix::identity(3)).sigma, (Vector{1, 1, 1}));
  const auto d = svd(Matrix{{3, 0}, {0, 1}}).sigma;
  EXPECT_DOUBLE_EQ(d[0], 3.0);
  EXPECT_DOUBLE_EQ(d[1], 1.0);
  const auto [s1, s2] = sigma_2x2(1, 2, 3, 4);
  const auto s = svd(Matrix{{1, 2}, {3, 4}}).sigma;
  EXPECT_NEAR(s[0], s1, 1e-13 * s1);
  EXPECT_NEAR(s[1], s2, 1e-13 * s1);
  EXPECT_NEAR(s[0], 5.46499, 1e-5);
  EXPECT_NEAR(s[1], 0.36597, 1e-5);
}

TEST(Svd, RandomShapesAgainstEigen) {
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t r = 1 + rng.below(24), c = 1 + rng.below(24);
    const Matrix a = rng.uniform_matrix(r, c, -1.0, 1.0);
    const auto s = svd(a);
    const std::size_t k = std::min(r, c);
    ASSERT_EQ(s.u.rows(), r);
    ASSERT_EQ(s.u.cols(), k);
    ASSERT_EQ(s.vt.rows(), k);
    ASSERT_EQ(s.vt.cols(), c);
    EXPECT_LE(frobenius_norm(reconstruct(s) - a), 1e-10 * std::max(1.0, frobenius_norm(a)));
    EXPECT_LE(frobenius_norm(matmul(transpose(s.u), s.u) - Matrix::identity(k)), 1e-10 * k);
    EXPECT_LE(frobenius_norm(matmul(s.vt, transpose(s.vt)) - Matrix::identity(k)), 1e-10 * k);
    Eigen::JacobiSVD<Eigen::MatrixXd> oracle(to_eigen(a));
    for (std::size_t i = 0; i < k; ++i) {
      EXPECT_NEAR(s.sigma[i], oracle.singularValues()(i), 1e-12 * s.sigma[0]);
      if (i + 1 < k) EXPECT_GE(s.sigma[i], s.sigma[i + 1]);
    }
  }
}

TEST(Svd, RankDeficientStillOrthonormal) {
  const Matrix a{{1, 2, 3}, {2, 4, 6}, {0, 0, 0}, {1, 1, 1}};
  const auto s = svd(a);
  EXPECT_LE(frobenius_norm(reconstruct(s) - a), 1e-12 * frobenius_norm(a));
  EXPECT_LE(frobenius_norm(matmul(transpose(s.u), s.u) - Matrix::identity(3)), 1e-10);
  EXPECT_LT(s.sigma[2], 1e-14);
}

TEST(Svd, SignConventionAndDeterminism) {
  Rng rng(5);
  const Matrix a = rng.uniform_matrix(7, 5, -1, 1);
  const auto s1 = svd(a), s2 = svd(a);
  EXPECT_EQ(s1.u, s2.u);
  EXPECT_EQ(s1.vt, s2.vt);
  for (std::size_t r = 0; r < s1.vt.rows(); ++r) {
    for (double x : s1.vt.row(r)) {
      if (x == 0.0) continue;
      EXPECT_GT(x, 0.0);
      break;
    }
  }
}

TEST(Svd, ScaleEquivarianceAndTranspose) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = rng.uniform_matrix(6, 9, -1, 1);
    const double c = rng.log_uniform(1e-3, 1e3);
    const auto s = singular_values(a), sc = singular_values(c * a);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(sc[i], c * s[i], 1e-12 * c * s[i]);
    const double k = condition_number(a);
    EXPECT_NEAR(condition_number(c * a), k, 1e-12 * k);
    EXPECT_NEAR(condition_number(transpose(a)), k, 1e-12 * k);
  }
}

TEST(ConditionNumber, Examples) {
  EXPECT_DOUBLE_EQ(condition_number(Matrix::identity(5)), 1.0);
  EXPECT_DOUBLE_EQ(condition_number(Matrix{{100, 0}, {0, 1}}), 100.0);
  EXPECT_NEAR(condition_number(Matrix{{3, 4}, {0, 5}}), 3.0, 1e-14);
  EXPECT_DOUBLE_EQ(condition_number(7.5 * Matrix::identity(3)), 1.0);
}

TEST(ConditionNumber, Errors) {
  try {
    condition_number(Matrix{{1, 0}, {0, 1e-13}});
    FAIL();
  } catch (const RankDeficientError& e) {
    EXPECT_DOUBLE_EQ(e.sigma_max(), 1.0);
    EXPECT_DOUBLE_EQ(e.sigma_min(), 1e-13);
  }
  EXPECT_NO_THROW(condition_number(Matrix{{1, 0}, {0, 1e-13}}, 1e-14));
  EXPECT_THROW(condition_number(Matrix(2, 2)), InvalidArgument);
  EXPECT_THROW(condition_number(Matrix::identity(2), 0.0), InvalidArgument);
  EXPECT_THROW(condition_number(Matrix::identity(2), 1.0), InvalidArgument);
}

TEST(MatrixIo, RoundTripAndRejects) {
  Rng rng(9);
  const Matrix a = rng.normal_matrix(3, 4);
  std::stringstream ss;
  write_matrix(ss, a);
  EXPECT_EQ(read_matrix(ss), a);

  std::istringstream ok("# comment\n2 2\n1 2e0\n\n3 4.5\n");
  EXPECT_EQ(read_matrix(ok), (Matrix{{1, 2}, {3, 4.5}}));
  std::istringstream ragged("2 2\n1 2\n3\n");
  EXPECT_THROW(read_matrix(ragged), InvalidArgument);
  std::istringstream bad("1 2\n1 x\n");
  EXPECT_THROW(read_matrix(bad), InvalidArgument);
  std::istringstream extra("1 1\n1\n2\n");
  EXPECT_THROW(read_matrix(extra), InvalidArgument);
}

TEST(Rng, DeterministicStreams) {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, "a"), derive_seed(1, "b"));
  EXPECT_EQ(derive_seed(7, "x"), derive_seed(7, "x"));
  Rng c(1);
  const auto p = c.permutation(50);
  std::vector<std::size_t> sorted = p;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Rng, RandomSpdHasRequestedSpectrum) {
  Rng rng(2);
  const Matrix a = random_spd(rng, 6, 1e4, 3.0);
  EXPECT_LE(frobenius_norm(a - transpose(a)), 1e-12 * frobenius_norm(a));
  const auto s = singular_values(a);
  EXPECT_NEAR(s.front(), 3.0, 1e-10);
  EXPECT_NEAR(s.front() / s.back(), 1e4, 1e-6 * 1e4);
}
