#include "wcond/net/dataset.hpp"

#include <cmath>
#include <numbers>

#include "wcond/rng.hpp"
#include "wcond/svd.hpp"

namespace wcond::net {

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Matrix xs(rows.size(), x.cols());
  Matrix ys(rows.size(), y.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto xr = x.row(rows[i]);
    const auto yr = y.row(rows[i]);
    std::copy(xr.begin(), xr.end(), xs.row(i).begin());
    std::copy(yr.begin(), yr.end(), ys.row(i).begin());
  }
  return {std::move(xs), std::move(ys)};
}

namespace {

Matrix scaled(const Matrix& g, double log_ratio) {
  const std::size_t n = g.rows();
  std::vector<double> d(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double frac = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    d[i] = std::exp(-log_ratio * frac);
  }
  return scale_rows(g, d);
}

}  // namespace

Matrix imbalance_rows_to_kappa(const Matrix& g, double target) {
  if (!(target >= 1.0)) throw InvalidArgument("imbalance_rows_to_kappa: target must be >= 1");
  const double base = condition_number(g);
  if (target <= base) return g;
  double lo = 0.0;
  double hi = std::log(target) + 1.0;
  while (condition_number(scaled(g, hi)) < target) {
    hi *= 2.0;
    if (hi > 700.0) throw InvalidArgument("imbalance_rows_to_kappa: target not reachable");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double k = condition_number(scaled(g, mid));
    if (std::abs(k - target) <= 1e-10 * target) return scaled(g, mid);
    (k < target ? lo : hi) = mid;
  }
  return scaled(g, 0.5 * (lo + hi));
}

TeacherStudent teacher_student(const TeacherSpec& spec, std::uint64_t seed) {
  if (spec.samples == 0 || spec.in_dim == 0 || spec.hidden == 0 || spec.out_dim == 0) {
    throw InvalidArgument("teacher_student: all sizes must be positive");
  }
  Rng rng(derive_seed(seed, "teacher"));
  const Matrix g = rng.normal_matrix(spec.in_dim, spec.hidden);
  Matrix w1 = spec.in_dim >= 2 ? imbalance_rows_to_kappa(g, spec.teacher_kappa) : g;
  Vector b1(spec.hidden);
  for (double& v : b1) v = 0.1 * rng.normal();
  Matrix w2 = rng.normal_matrix(spec.hidden, spec.out_dim);
  for (double& v : w2.data()) v /= std::sqrt(static_cast<double>(spec.hidden));
  Vector b2(spec.out_dim);
  for (double& v : b2) v = 0.1 * rng.normal();

  Rng data_rng(derive_seed(seed, "teacher-data"));
  Matrix x = data_rng.normal_matrix(spec.samples, spec.in_dim);
  Matrix h = matmul(x, w1);
  for (std::size_t i = 0; i < h.rows(); ++i) {
    auto r = h.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      double v = r[j] + b1[j];
      if (spec.activation == Activation::tanh) v = std::tanh(v);
      if (spec.activation == Activation::relu) v = v > 0.0 ? v : 0.0;
      r[j] = v;
    }
  }
  Matrix y = matmul(h, w2);
  for (std::size_t i = 0; i < y.rows(); ++i) {
    auto r = y.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += b2[j] + spec.noise * data_rng.normal();
  }
  const double achieved = spec.in_dim >= 2 ? condition_number(w1) : 1.0;
  return {{std::move(x), std::move(y)}, std::move(w1), achieved};
}

Dataset two_moons(std::size_t samples, double noise, std::uint64_t seed) {
  if (samples < 2) throw InvalidArgument("two_moons: need at least 2 samples");
  Rng rng(derive_seed(seed, "two-moons"));
  Matrix x(samples, 2);
  Matrix y(samples, 1);
  const std::size_t upper = samples / 2;
  for (std::size_t i = 0; i < samples; ++i) {
    const bool first = i < upper;
    const std::size_t count = first ? upper : samples - upper;
    const std::size_t idx = first ? i : i - upper;
    const double t =
        count == 1 ? 0.0 : std::numbers::pi * static_cast<double>(idx) / static_cast<double>(count - 1);
    if (first) {
      x(i, 0) = std::cos(t);
      x(i, 1) = std::sin(t);
    } else {
      x(i, 0) = 1.0 - std::cos(t);
      x(i, 1) = 0.5 - std::sin(t);
    }
    x(i, 0) += noise * rng.normal();
    x(i, 1) += noise * rng.normal();
    y(i, 0) = first ? 0.0 : 1.0;
  }
  return {std::move(x), std::move(y)};
}

Dataset linear_dataset(std::size_t samples, std::size_t in_dim, std::size_t out_dim,
                       std::uint64_t seed) {
  Rng rng(derive_seed(seed, "linear"));
  const Matrix w = rng.normal_matrix(in_dim, out_dim);
  Vector b(out_dim);
  for (double& v : b) v = rng.normal();
  Matrix x = rng.normal_matrix(samples, in_dim);
  Matrix y = matmul(x, w);
  for (std::size_t i = 0; i < samples; ++i)
    for (std::size_t j = 0; j < out_dim; ++j) y(i, j) += b[j];
  return {std::move(x), std::move(y)};
}

}  // namespace wcond::net
