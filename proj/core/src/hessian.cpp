#include "wcond/hessian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <ostream>
#include <stdexcept>

#include "wcond/errors.hpp"
#include "wcond/rng.hpp"
#include "wcond/svd.hpp"

namespace wcond {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_dim(const Objective& f, std::span<const double> theta, const char* who) {
  if (!f.value || !f.gradient) throw InvalidArgument(std::string(who) + ": objective incomplete");
  if (theta.size() != f.dim) throw InvalidArgument(std::string(who) + ": theta length mismatch");
  if (f.dim == 0) throw InvalidArgument(std::string(who) + ": empty parameter vector");
  if (f.dim > kMaxHessianDim) {
    throw InvalidArgument(std::string(who) + ": dimension " + std::to_string(f.dim) +
                          " exceeds the cap of " + std::to_string(kMaxHessianDim));
  }
}

Vector shifted(std::span<const double> theta, std::size_t i, double h) {
  Vector t(theta.begin(), theta.end());
  t[i] += h;
  return t;
}

}  // namespace

GradientCheck check_gradient(const Objective& f, std::span<const double> theta,
                             std::size_t directions, std::uint64_t seed) {
  check_dim(f, theta, "check_gradient");
  const Vector g = f.gradient(theta);
  const double f0 = f.value(theta);
  double scale = 1.0;
  for (double t : theta) scale = std::max(scale, std::abs(t));
  const double h = std::cbrt(kEps) * scale;
  // Roundoff in the two loss evaluations, converted to a derivative error.
  const double noise = 16.0 * kEps * std::max(1.0, std::abs(f0)) / h;

  Rng rng(derive_seed(seed, "gradient-check"));
  GradientCheck out;
  for (std::size_t k = 0; k < directions; ++k) {
    Vector d(f.dim);
    for (auto& v : d) v = rng.normal();
    const double nd = norm2(d);
    for (auto& v : d) v /= nd;
    Vector tp(theta.begin(), theta.end()), tm = tp;
    for (std::size_t i = 0; i < f.dim; ++i) {
      tp[i] += h * d[i];
      tm[i] -= h * d[i];
    }
    const double fd = (f.value(tp) - f.value(tm)) / (2.0 * h);
    const double an = dot(g, d);
    const double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
    const double err = std::max(0.0, std::abs(fd - an) - noise) / denom;
    out.max_rel_error = std::max(out.max_rel_error, err);
    ++out.directions;
  }
  return out;
}

HessianEstimate fd_hessian(const Objective& f, std::span<const double> theta) {
  check_dim(f, theta, "fd_hessian");
  const auto gc = check_gradient(f, theta, 3, 0x4e55);
  if (gc.max_rel_error > 1e-5) {
    throw GradientCheckError("fd_hessian: gradient self-check failed (relative error " +
                          std::to_string(gc.max_rel_error) + ")");
  }
  const std::size_t n = f.dim;
  HessianEstimate est{Matrix(n, n), Vector(theta.begin(), theta.end()), Vector(n), 0.0, 0.0};
  est.grad_norm = norm2(f.gradient(theta));

  std::vector<double> raw(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double h = std::cbrt(kEps) * std::max(1.0, std::abs(theta[i]));
    est.step_sizes[i] = h;
    const Vector gp = f.gradient(shifted(theta, i, h));
    const Vector gm = f.gradient(shifted(theta, i, -h));
    for (std::size_t j = 0; j < n; ++j) {
      const double v = (gp[j] - gm[j]) / (2.0 * h);
      if (!std::isfinite(v)) throw NonFiniteError("fd_hessian column", i);
      raw[i * n + j] = v;  // row i holds d g / d theta_i
    }
  }
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = raw[i * n + j] - raw[j * n + i];
      asym += d * d;
      est.h(i, j) = 0.5 * (raw[i * n + j] + raw[j * n + i]);
    }
  }
  est.asymmetry = std::sqrt(asym);
  return est;
}

Matrix fd_hessian_loss_only(const Objective& f, std::span<const double> theta) {
  check_dim(f, theta, "fd_hessian_loss_only");
  const std::size_t n = f.dim;
  Vector h(n);
  for (std::size_t i = 0; i < n; ++i) {
    h[i] = std::pow(kEps, 0.25) * std::max(1.0, std::abs(theta[i]));
  }
  const double f0 = f.value(theta);
  Matrix out(n, n);
  Vector t(theta.begin(), theta.end());
  auto at = [&](std::size_t i, double si, std::size_t j, double sj) {
    t[i] += si * h[i];
    t[j] += sj * h[j];
    const double v = f.value(t);
    t[i] -= si * h[i];
    t[j] -= sj * h[j];
    return v;
  };
  for (std::size_t i = 0; i < n; ++i) {
    t[i] += h[i];
    const double fp = f.value(t);
    t[i] -= 2.0 * h[i];
    const double fm = f.value(t);
    t[i] = theta[i];
    out(i, i) = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v =
          (at(i, 1, j, 1) - at(i, 1, j, -1) - at(i, -1, j, 1) + at(i, -1, j, -1)) /
          (4.0 * h[i] * h[j]);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

HessianKappa hessian_kappa(const Matrix& h, double rank_tol) {
  if (!(rank_tol > 0.0 && rank_tol < 1.0)) {
    throw InvalidArgument("hessian_kappa: rank_tol must lie in (0, 1)");
  }
  const Vector s = singular_values(h);
  HessianKappa out;
  out.sigma_max = s.front();
  out.sigma_min = s.back();
  if (s.front() == 0.0) return out;
  for (double v : s)
    if (v > rank_tol * s.front()) ++out.surviving;
  out.pseudo_kappa = s.front() / s[out.surviving - 1];
  out.full_rank = out.surviving == s.size();
  if (out.full_rank) out.kappa = s.front() / s.back();
  return out;
}

Objective network_objective(const net::Network& network, const net::Dataset& data,
                            net::LossKind loss, net::Phase phase) {
  auto base = std::make_shared<const net::Network>(network);
  auto ds = std::make_shared<const net::Dataset>(data);
  Objective f;
  f.dim = network.param_count();
  f.value = [base, ds, loss, phase](std::span<const double> theta) {
    net::Network n = *base;
    n.set_params(theta);
    return net::dataset_loss(n, *ds, loss, phase);
  };
  f.gradient = [base, ds, loss, phase](std::span<const double> theta) {
    net::Network n = *base;
    n.set_params(theta);
    return net::loss_and_gradient(n, ds->x, ds->y, loss, phase).grad;
  };
  return f;
}

std::vector<KappaComparison> Theorem2Result::comparisons() const {
  std::vector<KappaComparison> out;
  for (const auto& p : points)
    if (p.both_full_rank()) out.push_back(p);
  return out;
}

double Theorem2Result::satisfied_fraction() const {
  const auto n = comparisons().size();
  return n == 0 ? 0.0 : static_cast<double>(satisfied) / static_cast<double>(n);
}

namespace {

struct Point {
  std::uint64_t seed;
  std::string phase;
  Vector theta;
};

std::vector<net::LayerSpec> with_conditioning(std::vector<net::LayerSpec> arch,
                                              net::Conditioning c) {
  for (auto& s : arch) s.conditioning = c;
  return arch;
}

std::vector<Point> sample_points(const Theorem2Config& cfg, const net::Dataset& data,
                                 const std::vector<net::LayerSpec>& plain) {
  std::vector<Point> pts;
  const std::size_t n_init = (cfg.n_points + 1) / 2;
  const std::size_t n_snap = cfg.n_points - n_init;
  const std::uint64_t init_base = derive_seed(cfg.seed, "theorem2-init");
  for (std::size_t i = 0; i < n_init; ++i) {
    const auto s = derive_seed(init_base, i);
    const net::Network n(plain, s);
    pts.push_back({s, "init", Vector(n.params().begin(), n.params().end())});
  }
  if (n_snap == 0) return pts;

  const std::size_t epochs = std::max<std::size_t>(cfg.reference.epochs, 4);
  const std::size_t marks[3] = {std::max<std::size_t>(1, epochs / 4), epochs / 2,
                                (3 * epochs) / 4};
  const char* names[3] = {"sgd_25", "sgd_50", "sgd_75"};
  const std::uint64_t snap_base = derive_seed(cfg.seed, "theorem2-snapshot");
  for (std::size_t run = 0; pts.size() < cfg.n_points; ++run) {
    const auto s = derive_seed(snap_base, run);
    net::Network n(plain, s);
    auto opt = cfg.reference;
    opt.epochs = marks[2];
    opt.seed = s;
    opt.record_kappa = false;
    opt.eval = nullptr;
    std::vector<Point> got;
    opt.on_epoch = [&](std::size_t epoch, const net::Network& cur) {
      for (int m = 0; m < 3; ++m) {
        if (epoch == marks[m]) {
          got.push_back({s, names[m], Vector(cur.params().begin(), cur.params().end())});
        }
      }
    };
    const auto tr = net::train(n, data, opt);
    if (tr.diverged && got.empty()) {
      throw std::runtime_error("compare_theorem2: reference run diverged before its first snapshot");
    }
    for (auto& p : got) {
      if (pts.size() < cfg.n_points) pts.push_back(std::move(p));
    }
    if (run > cfg.n_points) throw std::runtime_error("compare_theorem2: reference runs keep diverging");
  }
  return pts;
}

}  // namespace

Theorem2Result compare_theorem2(const Theorem2Config& cfg, const net::Dataset& data) {
  Theorem2Result res;
  if (cfg.n_points == 0) return res;
  const auto plain = with_conditioning(cfg.arch, net::Conditioning::none);
  const auto eq = with_conditioning(cfg.arch, net::Conditioning::equilibrate_reparam);
  const net::Network plain_net(plain, cfg.seed);
  const net::Network eq_net(eq, cfg.seed);
  if (plain_net.param_count() != eq_net.param_count()) {
    throw InvalidArgument("compare_theorem2: conditioned twin changed the parameter count");
  }
  if (plain_net.param_count() > kMaxHessianDim) {
    throw InvalidArgument("compare_theorem2: too many parameters for a finite-difference Hessian");
  }
  const auto f_plain = network_objective(plain_net, data, cfg.loss);
  const auto f_eq = network_objective(eq_net, data, cfg.loss);

  for (const auto& p : sample_points(cfg, data, plain)) {
    KappaComparison c;
    c.theta_seed = p.seed;
    c.phase = p.phase;
    c.rank_tol = cfg.rank_tol;
    HessianKappa kp, ke;
    try {
      kp = hessian_kappa(fd_hessian(f_plain, p.theta).h, cfg.rank_tol);
      ke = hessian_kappa(fd_hessian(f_eq, p.theta).h, cfg.rank_tol);
    } catch (const GradientCheckError&) {
      // The Hessian is not defined here (typically a ReLU kink inside the FD
      // stencil); keep the point, excluded from the comparison.
      c.gradient_check_ok = false;
      res.points.push_back(c);
      continue;
    }
    c.kappa_plain = kp.full_rank ? kp.kappa : kp.pseudo_kappa;
    c.kappa_eq = ke.full_rank ? ke.kappa : ke.pseudo_kappa;
    c.rank_ok_plain = kp.full_rank;
    c.rank_ok_eq = ke.full_rank;
    c.surviving_plain = kp.surviving;
    c.surviving_eq = ke.surviving;
    res.points.push_back(c);
    if (!c.both_full_rank()) continue;
    if (c.kappa_eq <= c.kappa_plain * (1.0 + cfg.tolerance)) {
      ++res.satisfied;
    } else {
      res.violations.push_back(c);
    }
  }
  if (res.comparisons().empty()) {
    throw std::runtime_error(
        "compare_theorem2: every sampled Hessian is numerically rank-deficient; "
        "use a smaller network or a looser rank_tol");
  }
  return res;
}

void write_kappa_comparisons_csv(std::ostream& out, const std::vector<KappaComparison>& rows) {
  const auto old = out.precision(17);
  out << kKappaComparisonHeader << '\n';
  for (const auto& r : rows) {
    out << r.theta_seed << ',' << r.phase << ',' << r.kappa_plain << ',' << r.kappa_eq << ','
        << (r.rank_ok_plain ? 1 : 0) << ',' << (r.rank_ok_eq ? 1 : 0) << '\n';
  }
  out.precision(old);
}

}  // namespace wcond
