#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "wcond/errors.hpp"
#include "wcond/precond.hpp"
#include "wcond/quadratic.hpp"
#include "wcond/rng.hpp"
#include "wcond/svd.hpp"

using namespace wcond;

namespace {

QuadraticProblem diag_problem(std::initializer_list<double> d) {
  const Vector v(d);
  return QuadraticProblem(Matrix::diagonal(v), Vector(v.size(), 0.0));
}

// D S D with S mildly conditioned and D log-spread: badly scaled but easy for Jacobi.
Matrix badly_scaled_spd(Rng& rng, std::size_t n, double target_kappa) {
  const Matrix s = random_spd(rng, n, 5.0);
  auto build = [&](double spread) {
    Vector d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = std::pow(10.0, spread * i / (n - 1.0));
    Matrix a = scale_cols(scale_rows(s, d), d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) a(j, i) = a(i, j);
    return a;
  };
  double lo = 0.0, hi = 4.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (condition_number(build(mid)) < target_kappa ? lo : hi) = mid;
  }
  return build(lo);
}

}  // namespace

TEST(Quadratic, LossExamples) {
  EXPECT_DOUBLE_EQ(diag_problem({1, 1}).loss(Vector{1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(diag_problem({2, 4}).loss(Vector{1, 1}), 3.0);
  const QuadraticProblem q(Matrix{{4, 1}, {1, 3}}, Vector{1, 2});
  const Vector ts = q.minimizer();
  EXPECT_NEAR(q.loss(ts), -15.0 / 22.0, 1e-15);
  EXPECT_THROW(q.loss(Vector{1}), InvalidArgument);
}

TEST(Quadratic, Validation) {
  EXPECT_THROW(QuadraticProblem(Matrix{{1, 2}, {0, 1}}, Vector{0, 0}), InvalidArgument);
  EXPECT_THROW(QuadraticProblem(Matrix{{1, 0}, {0, 0}}, Vector{0, 0}), RankDeficientError);
  EXPECT_THROW(QuadraticProblem(Matrix::identity(2), Vector{0}), InvalidArgument);
}

TEST(Quadratic, GradientExamples) {
  const QuadraticProblem q(Matrix{{4, 1}, {1, 3}}, Vector{1, 2});
  for (double g : q.gradient(q.minimizer())) EXPECT_NEAR(g, 0.0, 1e-10);
  const Vector th{0.3, -2.0, 5.0};
  EXPECT_EQ(diag_problem({1, 1, 1}).gradient(th), th);
  EXPECT_EQ(q.hessian(), q.a());
}

TEST(Quadratic, GradientMatchesCentralDifferences) {
  Rng rng(17);
  for (int f = 0; f < 10; ++f) {
    const std::size_t n = 2 + rng.below(6);
    const QuadraticProblem q(random_spd(rng, n, 100.0), [&] {
      Vector b(n);
      for (auto& v : b) v = rng.normal();
      return b;
    }());
    Vector th(n);
    for (auto& v : th) v = rng.normal();
    const Vector g = q.gradient(th);
    for (std::size_t i = 0; i < n; ++i) {
      const double h = 1e-5;
      Vector p = th, m = th;
      p[i] += h;
      m[i] -= h;
      const double fd = (q.loss(p) - q.loss(m)) / (2 * h);
      EXPECT_NEAR(fd, g[i], 1e-6 * std::max(1.0, std::abs(g[i])));
    }
  }
}

TEST(RunGd, Examples) {
  const auto one = run_gd(diag_problem({1}), Vector{5}, 1.0, 3);
  EXPECT_EQ(one.iterates[1][0], 0.0);

  const auto osc = run_gd(diag_problem({2}), Vector{3}, 1.0, 50);
  for (const auto& th : osc.iterates) EXPECT_DOUBLE_EQ(std::abs(th[0]), 3.0);
  EXPECT_FALSE(osc.diverged);

  const auto div = run_gd(diag_problem({4, 1}), Vector{1, 1}, 0.6, 500);
  EXPECT_TRUE(div.diverged);
  EXPECT_LT(div.iterations(), 500u);
  for (std::size_t t = 1; t < div.mode_coeffs.size(); ++t) {
    EXPECT_LT(std::abs(div.mode_coeffs[t][1]), std::abs(div.mode_coeffs[t - 1][1]));
  }
  EXPECT_EQ(div.iterates.size(), div.losses.size());
  EXPECT_EQ(div.iterates.size(), div.mode_coeffs.size());
}

TEST(RunGd, Validation) {
  const auto q = diag_problem({1, 2});
  EXPECT_THROW(run_gd(q, Vector{1, 1}, -1.0, 5), InvalidArgument);
  EXPECT_THROW(run_gd(q, Vector{1, 1}, 0.1, 0), InvalidArgument);
  EXPECT_THROW(run_gd(q, Vector{1, 1}, 0.1, kMaxGdIterations + 1), InvalidArgument);
  EXPECT_THROW(run_gd(q, Vector{1}, 0.1, 5), InvalidArgument);
}

TEST(RunGd, NonFiniteIsAFlagNotACrash) {
  const auto tr = run_gd(diag_problem({1e300}), Vector{1e10}, 1e10, 10);
  EXPECT_TRUE(tr.diverged);
}

TEST(PredictedModes, Examples) {
  const auto q = diag_problem({4, 1});
  const Vector th{1, 1};
  EXPECT_EQ(predicted_modes(q, th, 0.25, 0), (Vector{1, 1}));
  const auto p = predicted_modes(q, th, 0.25, 4);
  EXPECT_DOUBLE_EQ(p[0], 0.0);
  EXPECT_DOUBLE_EQ(p[1], 0.31640625);
  EXPECT_EQ(predicted_modes(q, th, 0.0, 17), predicted_modes(q, th, 0.0, 0));
}

TEST(PredictedModes, AgreeWithSimulation) {
  Rng rng(23);
  for (int f = 0; f < 20; ++f) {
    const std::size_t n = 2 + rng.below(7);
    const QuadraticProblem q(random_spd(rng, n, rng.log_uniform(10, 1e6)), Vector(n, 0.0));
    Vector th(n);
    for (auto& v : th) v = rng.normal();
    for (double rho : {0.3, 0.9, 0.99}) {
      const auto tr = run_gd(q, th, rho * max_stable_lr(q), 400);
      const auto m = mode_agreement(q, tr);
      EXPECT_LE(m.max_rel_error, 1e-8);
      EXPECT_GT(m.compared, 0u);
    }
  }
}

TEST(PredictedModes, MonotoneIffContracting) {
  const auto q = diag_problem({4, 1});
  const auto tr = run_gd(q, Vector{1, 1}, 0.45, 30);  // rates -0.8 and 0.55
  for (std::size_t t = 1; t < tr.mode_coeffs.size(); ++t) {
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_LE(std::abs(tr.mode_coeffs[t][i]), std::abs(tr.mode_coeffs[t - 1][i]));
    }
  }
}

TEST(MaxStableLr, ExamplesAndDichotomy) {
  EXPECT_DOUBLE_EQ(max_stable_lr(diag_problem({1, 1, 1})), 2.0);
  EXPECT_DOUBLE_EQ(max_stable_lr(diag_problem({4, 1})), 0.5);
  Rng rng(31);
  for (int f = 0; f < 10; ++f) {
    const std::size_t n = 2 + rng.below(5);
    const QuadraticProblem q(random_spd(rng, n, rng.log_uniform(10, 1e6)), Vector(n, 1.0));
    Vector th(n);
    for (auto& v : th) v = rng.normal();
    EXPECT_FALSE(run_gd(q, th, 0.99 * max_stable_lr(q), 3000).diverged);
    EXPECT_TRUE(run_gd(q, th, 1.01 * max_stable_lr(q), 3000).diverged);
  }
}

TEST(RunGd, LimitMatchesMinimizer) {
  Rng rng(41);
  for (int f = 0; f < 5; ++f) {
    const std::size_t n = 3 + rng.below(4);
    Vector b(n);
    for (auto& v : b) v = rng.normal();
    const QuadraticProblem q(random_spd(rng, n, 10.0), b);
    const auto tr = run_gd(q, Vector(n, 0.0), 0.9 * max_stable_lr(q), 2000);
    ASSERT_LE(norm2(q.gradient(tr.iterates.back())), 1e-10);
    const Vector ts = q.minimizer();
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(tr.iterates.back()[i], ts[i], 1e-8);
  }
}

TEST(Preconditioned, IdentityKeepsMinimizer) {
  const QuadraticProblem q(Matrix{{4, 1}, {1, 3}}, Vector{1, 2});
  const auto pq = preconditioned_problem(q, DiagonalPreconditioner::identity(2));
  const Vector ts = q.minimizer();
  // The residual PA theta - Pb vanishes at theta*, and the loss as printed
  // (no 1/2, so gradient 2A theta - b for P = I) is stationary at theta*/2.
  for (double r : pq.residual(ts)) EXPECT_NEAR(r, 0.0, 1e-12);
  for (double g : pq.gradient(Vector{ts[0] / 2, ts[1] / 2})) EXPECT_NEAR(g, 0.0, 1e-12);
  // No 1/2 in the preconditioned loss: with P = I it is twice the original quadratic term.
  const Vector th{0.7, -0.2};
  EXPECT_NEAR(pq.loss(th) + dot(q.b(), th), 2.0 * (q.loss(th) + dot(q.b(), th)), 1e-14);
}

TEST(Preconditioned, SymmetrizedGradientMatchesLoss) {
  const QuadraticProblem q(Matrix{{4, 1}, {1, 3}}, Vector{1, 2});
  const auto pq = preconditioned_problem(q, jacobi_precondition(q.a()).precond);
  const Vector th{0.4, -1.1};
  const Vector g = pq.gradient(th);
  for (std::size_t i = 0; i < 2; ++i) {
    Vector p = th, m = th;
    p[i] += 1e-6;
    m[i] -= 1e-6;
    EXPECT_NEAR((pq.loss(p) - pq.loss(m)) / 2e-6, g[i], 1e-8);
  }
}

TEST(Preconditioned, RowEquilibratedDiagonalConvergesInOneStep) {
  const QuadraticProblem q(Matrix{{1, 0}, {0, 100}}, Vector{1, 1});
  const auto pq = preconditioned_problem(q, row_equilibrate(q.a()).precond);
  EXPECT_DOUBLE_EQ(pq.kappa_a(), 100.0);
  EXPECT_DOUBLE_EQ(pq.kappa_pa(), 1.0);
  const auto tr = run_gd(pq, Vector{3, -4}, 1.0, 2);
  const Vector ts = q.minimizer();
  EXPECT_NEAR(tr.iterates[1][0], ts[0], 1e-15);
  EXPECT_NEAR(tr.iterates[1][1], ts[1], 1e-15);
}

TEST(Preconditioned, JacobiNeedsFewerIterations) {
  Rng rng(53);
  const std::size_t n = 8;
  const Matrix a = badly_scaled_spd(rng, n, 1e4);
  ASSERT_NEAR(condition_number(a), 1e4, 1.0);
  Vector b(n);
  for (auto& v : b) v = rng.normal();
  const QuadraticProblem q(a, b);
  const double opt = q.loss(q.minimizer());
  const auto pq = preconditioned_problem(q, jacobi_precondition(a).precond);
  const Vector th0(n, 0.0);
  const auto plain = run_gd(q, th0, 0.9 * max_stable_lr(q), 200000);
  const auto pre = run_gd(pq, th0, 0.9 * 2.0 / pq.sigma_max_pa(), 200000);
  const auto it_plain = iterations_to_tolerance(plain, opt, 1e-8);
  const auto it_pre = iterations_to_tolerance(pre, opt, 1e-8);
  ASSERT_NE(it_pre, kNotReached);
  EXPECT_LT(it_pre, it_plain);
}

TEST(GdTrace, CsvLayout) {
  const auto tr = run_gd(diag_problem({4, 1}), Vector{1, 1}, 0.25, 2);
  std::ostringstream os;
  write_gd_trace_csv(os, tr);
  EXPECT_EQ(os.str(),
            "# eta=0.25 kappa=4 diverged=false sigma=4;1\n"
            "iter,loss,theta_norm,mode_0,mode_1\n"
            "0,2.5,1.4142135623730951,1,1\n"
            "1,0.28125,0.75,0,0.75\n"
            "2,0.158203125,0.5625,0,0.5625\n");
}
