#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "wcond/errors.hpp"
#include "wcond/hessian.hpp"
#include "wcond/quadratic.hpp"
#include "wcond/rng.hpp"
#include "wcond/svd.hpp"

using namespace wcond;
using namespace wcond::net;

namespace {

Objective quadratic_objective(const QuadraticProblem& p) {
  return Objective{p.dim(), [&p](std::span<const double> t) { return p.loss(t); },
                   [&p](std::span<const double> t) { return p.gradient(t); }};
}

Objective half_norm_objective(std::size_t n) {
  return Objective{n,
                   [](std::span<const double> t) { return 0.5 * dot(t, t); },
                   [](std::span<const double> t) { return Vector(t.begin(), t.end()); }};
}

Vector normal_vector(Rng& rng, std::size_t n) {
  Vector v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

double rel_frobenius(const Matrix& a, const Matrix& ref) {
  return frobenius_norm(a - ref) / frobenius_norm(ref);
}

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

}  // namespace

TEST(FdHessian, QuadraticRecoversAUpToKappa1e6) {
  Rng rng(7);
  for (double kappa : {1.0, 1e2, 1e4, 1e6}) {
    for (int t = 0; t < 5; ++t) {
      const std::size_t n = 3 + rng.below(10);
      const QuadraticProblem p(random_spd(rng, n, kappa, rng.log_uniform(0.1, 10.0)),
                               normal_vector(rng, n));
      const Vector theta = normal_vector(rng, n);
      const auto est = fd_hessian(quadratic_objective(p), theta);
      EXPECT_LE(rel_frobenius(est.h, p.a()), 1e-6) << "kappa " << kappa;
      EXPECT_LE(est.asymmetry, 1e-4 * frobenius_norm(est.h));
      EXPECT_EQ(est.step_sizes.size(), n);
      EXPECT_EQ(est.theta, theta);
    }
  }
}

TEST(FdHessian, HalfNormGivesIdentity) {
  const Vector theta{0.3, -2.0, 5.0, 1e3};
  const auto est = fd_hessian(half_norm_objective(4), theta);
  EXPECT_LE(frobenius_norm(est.h - Matrix::identity(4)), 1e-6);
  EXPECT_NEAR(est.grad_norm, norm2(theta), 1e-12 * norm2(theta));
  const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
  EXPECT_DOUBLE_EQ(est.step_sizes[0], h0);
  EXPECT_DOUBLE_EQ(est.step_sizes[3], h0 * 1e3);
}

TEST(FdHessian, RejectsBadGradientAndNonFinite) {
  Objective wrong = half_norm_objective(3);
  wrong.gradient = [](std::span<const double> t) {
    Vector g(t.begin(), t.end());
    g[1] *= 1.5;
    return g;
  };
  EXPECT_THROW(fd_hessian(wrong, Vector{1, 2, 3}), InvalidArgument);

  // A gradient that is exact at theta but blows up at the probe points of coordinate 2.
  Objective spiky = half_norm_objective(3);
  spiky.gradient = [](std::span<const double> t) {
    Vector g(t.begin(), t.end());
    if (t[2] != 3.0 && std::abs(t[2] - 3.0) < 1e-3 && t[0] == 1.0 && t[1] == 2.0)
      g[0] = std::numeric_limits<double>::infinity();
    return g;
  };
  try {
    fd_hessian(spiky, Vector{1, 2, 3});
    FAIL();
  } catch (const NonFiniteError& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
  EXPECT_THROW(fd_hessian(half_norm_objective(kMaxHessianDim + 1), Vector(kMaxHessianDim + 1)),
               InvalidArgument);
}

TEST(FdHessian, TanhMlpMatchesLossOnlyOracleOnDominantDirections) {
  const auto ts = teacher_student({32, 2, 3, 1, 10.0, 0.0, Activation::tanh}, 5);
  Network net({dense(2, 3, Activation::tanh), dense(3, 1)}, 6);
  Rng rng(7);
  for (double& v : net.params()) v = rng.uniform(-1, 1);
  const Objective f = network_objective(net, ts.data, LossKind::mse);
  const Vector theta(net.params().begin(), net.params().end());
  const auto est = fd_hessian(f, theta);
  const Matrix oracle = fd_hessian_loss_only(f, theta);

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(to_eigen(est.h));
  const auto n = static_cast<Eigen::Index>(theta.size());
  const Eigen::MatrixXd o = to_eigen(oracle);
  // Eigenvalues come ascending; the dominant ones are largest in magnitude.
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
    return std::abs(eig.eigenvalues()(a)) > std::abs(eig.eigenvalues()(b));
  });
  for (std::size_t k = 0; k < 10; ++k) {
    const Eigen::VectorXd v = eig.eigenvectors().col(idx[k]);
    const double lam = eig.eigenvalues()(idx[k]);
    const double lo = v.dot(o * v);
    EXPECT_NEAR(lo, lam, 1e-4 * std::abs(lam)) << "direction " << k;
  }
  EXPECT_LE(est.asymmetry, 1e-4 * frobenius_norm(est.h));
}

TEST(HessianKappa, Examples) {
  const auto id = hessian_kappa(Matrix::identity(4));
  EXPECT_TRUE(id.full_rank);
  EXPECT_DOUBLE_EQ(id.kappa, 1.0);
  EXPECT_EQ(id.surviving, 4u);

  Matrix d(3, 3);
  d(0, 0) = 10;
  d(1, 1) = 1;
  d(2, 2) = 1e-12;
  const auto r = hessian_kappa(d);
  EXPECT_FALSE(r.full_rank);
  EXPECT_EQ(r.surviving, 2u);
  EXPECT_DOUBLE_EQ(r.pseudo_kappa, 10.0);

  EXPECT_THROW(hessian_kappa(Matrix::identity(2), 0.0), InvalidArgument);
  EXPECT_FALSE(hessian_kappa(Matrix(2, 2)).full_rank);
}

TEST(HessianKappa, MatchesConditionNumberOfQuadratic) {
  Rng rng(8);
  for (double kappa : {10.0, 1e3, 1e5}) {
    const QuadraticProblem p(random_spd(rng, 6, kappa), normal_vector(rng, 6));
    const auto est = fd_hessian(quadratic_objective(p), normal_vector(rng, 6));
    const auto hk = hessian_kappa(est.h);
    ASSERT_TRUE(hk.full_rank);
    EXPECT_NEAR(hk.kappa, condition_number(p.a()), 1e-4 * condition_number(p.a()));
  }
}

TEST(HessianKappa, InvariantUnderLossScaling) {
  const auto ts = teacher_student({32, 2, 4, 1, 100.0, 0.0, Activation::tanh}, 3);
  const Network net({dense(2, 4, Activation::tanh), dense(4, 1)}, 4);
  const Objective f = network_objective(net, ts.data, LossKind::mse);
  const Vector theta(net.params().begin(), net.params().end());
  const auto base = fd_hessian(f, theta);
  for (double c : {1e-3, 0.5, 7.0, 1e4}) {
    const Objective fc{f.dim, [&](std::span<const double> t) { return c * f.value(t); },
                       [&](std::span<const double> t) {
                         Vector g = f.gradient(t);
                         for (double& v : g) v *= c;
                         return g;
                       }};
    const auto hc = fd_hessian(fc, theta);
    const auto k0 = hessian_kappa(base.h, 1e-12), kc = hessian_kappa(hc.h, 1e-12);
    const double a = k0.full_rank ? k0.kappa : k0.pseudo_kappa;
    const double b = kc.full_rank ? kc.kappa : kc.pseudo_kappa;
    EXPECT_NEAR(b, a, 1e-10 * a) << c;
  }
}

TEST(FdHessian, SymmetryResidualSmallOnNetworks) {
  for (auto act : {Activation::tanh, Activation::relu}) {
    for (auto cond : {Conditioning::none, Conditioning::equilibrate_reparam}) {
      const auto ts = teacher_student({48, 2, 8, 1, 1e3, 0.0, Activation::tanh}, 11);
      Network net({dense(2, 8, act), dense(8, 1)}, 12);
      net = net.with_conditioning(cond);
      const auto est = fd_hessian(network_objective(net, ts.data, LossKind::mse),
                                  Vector(net.params().begin(), net.params().end()));
      EXPECT_LE(est.asymmetry, 1e-4 * frobenius_norm(est.h));
    }
  }
}

TEST(Theorem2, ZeroPointsGiveEmptyResult) {
  Theorem2Config cfg;
  cfg.arch = {dense(2, 8, Activation::tanh), dense(8, 1)};
  cfg.n_points = 0;
  const auto ts = teacher_student({32, 2, 8, 1, 1e3, 0.0, Activation::tanh}, 1);
  const auto r = compare_theorem2(cfg, ts.data);
  EXPECT_TRUE(r.points.empty());
  EXPECT_TRUE(r.comparisons().empty());
  EXPECT_EQ(r.satisfied, 0u);
}

TEST(Theorem2, OversizedNetworkRejected) {
  Theorem2Config cfg;
  cfg.arch = {dense(2, 1000, Activation::tanh), dense(1000, 1)};
  cfg.n_points = 2;
  const auto ts = teacher_student({8, 2, 4, 1, 10.0, 0.0, Activation::tanh}, 1);
  EXPECT_THROW(compare_theorem2(cfg, ts.data), InvalidArgument);
}

TEST(Theorem2, EqualWeightsFixedPoint) {
  // Whitened inputs (orthogonal columns scaled to unit second moment).
  Rng rng(3);
  const std::size_t n = 16;
  const Matrix q = random_orthogonal(rng, n);
  Dataset data{Matrix(n, 3), Matrix(n, 2)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 3; ++j) data.x(i, j) = q(i, j) * std::sqrt(double(n));
    data.y(i, 0) = rng.normal();
    data.y(i, 1) = rng.normal();
  }
  Network plain({dense(3, 2)}, 4);
  // Already equilibrated: unit fan-in vector per output unit.
  Matrix w = plain.weight(0);
  const auto norms = col_norms2(w);
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j) w(i, j) /= norms[j];
  plain.set_weight(0, w);
  const Vector theta(plain.params().begin(), plain.params().end());

  // Static conditioning leaves the parameters untouched up to rounding, so both
  // losses and Hessians coincide.
  const Network stat = condition_weights(plain);
  for (std::size_t i = 0; i < theta.size(); ++i) EXPECT_NEAR(stat.params()[i], theta[i], 1e-15);
  const Vector theta_s(stat.params().begin(), stat.params().end());
  const auto hp = fd_hessian(network_objective(plain, data, LossKind::mse), theta);
  const auto hs = fd_hessian(network_objective(stat, data, LossKind::mse), theta_s);
  EXPECT_LE(rel_frobenius(hs.h, hp.h), 1e-8);
  const auto kp = hessian_kappa(hp.h), ks = hessian_kappa(hs.h);
  ASSERT_TRUE(kp.full_rank && ks.full_rank);
  EXPECT_NEAR(ks.kappa, kp.kappa, 1e-6 * kp.kappa);

  // Under reparameterization E(W) = I here, so the loss and the tangential part
  // of the gradient agree; the radial part vanishes.
  const Network eq = plain.with_conditioning(Conditioning::equilibrate_reparam);
  const auto fp = network_objective(plain, data, LossKind::mse);
  const auto fe = network_objective(eq, data, LossKind::mse);
  EXPECT_NEAR(fe.value(theta), fp.value(theta), 1e-14);
  const Vector gp = fp.gradient(theta), ge = fe.gradient(theta);
  for (std::size_t j = 0; j < 2; ++j) {
    double radial = 0.0;
    for (std::size_t i = 0; i < 3; ++i) radial += gp[i * 2 + j] * w(i, j);
    for (std::size_t i = 0; i < 3; ++i)
      EXPECT_NEAR(ge[i * 2 + j], gp[i * 2 + j] - radial * w(i, j), 1e-13);
  }
  for (std::size_t k = 6; k < 8; ++k) EXPECT_NEAR(ge[k], gp[k], 1e-14);  // biases
}

TEST(Theorem2, SmallFixtureIsDeterministicAndSerializes) {
  Theorem2Config cfg;
  cfg.arch = {dense(2, 4, Activation::tanh), dense(4, 1)};
  cfg.n_points = 4;
  cfg.seed = 9;
  cfg.reference.epochs = 4;
  cfg.reference.sgd.lr = 0.05;
  const auto ts = teacher_student({32, 2, 4, 1, 1e3, 0.0, Activation::tanh}, 2);
  const auto a = compare_theorem2(cfg, ts.data);
  const auto b = compare_theorem2(cfg, ts.data);
  ASSERT_EQ(a.points.size(), 4u);
  EXPECT_EQ(a.points[0].phase, "init");
  EXPECT_EQ(a.points[1].phase, "init");
  EXPECT_EQ(a.points[2].phase.substr(0, 4), "sgd_");
  std::ostringstream sa, sb;
  write_kappa_comparisons_csv(sa, a.points);
  write_kappa_comparisons_csv(sb, b.points);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(sa.str().substr(0, kKappaComparisonHeader.size()), kKappaComparisonHeader);
  std::size_t lines = 0;
  for (char ch : sa.str()) lines += ch == '\n';
  EXPECT_EQ(lines, 5u);
  EXPECT_EQ(a.satisfied + a.violations.size(), a.comparisons().size());
}
