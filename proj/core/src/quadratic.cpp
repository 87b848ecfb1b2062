#include "wcond/quadratic.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace wcond {

namespace {

void check_len(std::span<const double> v, std::size_t n, const char* where) {
  if (v.size() != n) {
    throw InvalidArgument(std::string(where) + ": expected length " + std::to_string(n) +
                          ", got " + std::to_string(v.size()));
  }
}

Vector modes_of(const SvdResult& s, std::span<const double> theta, const Vector& theta_star) {
  const std::size_t n = theta.size();
  Vector diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = theta[i] - theta_star[i];
  return matvec(s.vt, diff);
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

template <class Direction>
GDTrace descend(const QuadraticProblem& base, std::span<const double> theta0, double eta,
                std::size_t iters, Direction&& direction) {
  check_len(theta0, base.dim(), "run_gd");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw InvalidArgument("run_gd: eta must be >= 0");
  if (iters == 0 || iters > kMaxGdIterations) {
    throw InvalidArgument("run_gd: iters must lie in [1, 1e6]");
  }
  const Vector theta_star = base.minimizer();

  GDTrace tr;
  tr.eta = eta;
  tr.sigma = base.sigma();
  tr.kappa = base.kappa();
  Vector theta(theta0.begin(), theta0.end());
  tr.iterates.push_back(theta);
  tr.losses.push_back(base.loss(theta));
  tr.mode_coeffs.push_back(modes_of(base.svd(), theta, theta_star));

  for (std::size_t t = 0; t < iters; ++t) {
    const Vector g = direction(theta);
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= eta * g[i];
    const double nrm = norm2(theta);
    const bool bad = !all_finite(theta) || !(nrm <= kDivergenceNorm);
    if (bad) {
      tr.diverged = true;
      if (!all_finite(theta)) break;
    }
    tr.iterates.push_back(theta);
    tr.losses.push_back(base.loss(theta));
    tr.mode_coeffs.push_back(modes_of(base.svd(), theta, theta_star));
    if (bad) break;
  }
  return tr;
}

}  // namespace

QuadraticProblem::QuadraticProblem(Matrix a, Vector b)
    : a_(std::move(a)), b_(std::move(b)), svd_(wcond::svd(a_)) {
  if (a_.rows() != a_.cols()) throw InvalidArgument("QuadraticProblem: A must be square");
  check_len(b_, a_.rows(), "QuadraticProblem");
  if (!all_finite(b_)) throw InvalidArgument("QuadraticProblem: b must be finite");
  if (frobenius_norm(a_ - transpose(a_)) > 1e-12 * frobenius_norm(a_)) {
    throw InvalidArgument("QuadraticProblem: A must be symmetric");
  }
  condition_from_sigma(svd_.sigma);  // throws RankDeficientError
}

double QuadraticProblem::loss(std::span<const double> theta) const {
  check_len(theta, dim(), "loss");
  const Vector at = matvec(a_, theta);
  return 0.5 * dot(theta, at) - dot(b_, theta);
}

Vector QuadraticProblem::gradient(std::span<const double> theta) const {
  check_len(theta, dim(), "gradient");
  Vector g = matvec(a_, theta);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= b_[i];
  return g;
}

Vector QuadraticProblem::minimizer() const { return solve_spd(a_, b_); }

GDTrace run_gd(const QuadraticProblem& p, std::span<const double> theta0, double eta,
               std::size_t iters) {
  return descend(p, theta0, eta, iters, [&](const Vector& th) { return p.gradient(th); });
}

std::vector<double> predicted_modes(const QuadraticProblem& p, std::span<const double> theta0,
                                    double eta, std::size_t t) {
  check_len(theta0, p.dim(), "predicted_modes");
  const Vector x0 = modes_of(p.svd(), theta0, p.minimizer());
  std::vector<double> out(x0.size());
  const double tt = static_cast<double>(t);
  for (std::size_t i = 0; i < x0.size(); ++i) {
    const double rate = 1.0 - eta * p.sigma()[i];
    out[i] = t == 0 ? x0[i] : x0[i] * std::pow(rate, tt);
  }
  return out;
}

double max_stable_lr(const QuadraticProblem& p) { return 2.0 / p.sigma().front(); }

ModeAgreement mode_agreement(const QuadraticProblem& p, const GDTrace& trace, double abs_floor,
                             double rel_floor) {
  ModeAgreement out;
  if (trace.iterates.empty()) return out;
  const Vector x0 = modes_of(p.svd(), trace.iterates.front(), p.minimizer());
  for (std::size_t t = 0; t < trace.mode_coeffs.size(); ++t) {
    Vector pred(x0.size());
    double top = 0.0;
    for (std::size_t i = 0; i < x0.size(); ++i) {
      pred[i] = t == 0 ? x0[i]
                       : x0[i] * std::pow(1.0 - trace.eta * p.sigma()[i], static_cast<double>(t));
      top = std::max(top, std::abs(pred[i]));
    }
    for (std::size_t i = 0; i < x0.size(); ++i) {
      const double mag = std::abs(pred[i]);
      if (mag < abs_floor || mag < rel_floor * top || !std::isfinite(mag)) {
        ++out.skipped;
        continue;
      }
      const double err = std::abs(trace.mode_coeffs[t][i] - pred[i]) / mag;
      out.max_rel_error = std::max(out.max_rel_error, err);
      ++out.compared;
    }
  }
  return out;
}

PreconditionedQuadratic::PreconditionedQuadratic(const QuadraticProblem& base,
                                                 const DiagonalPreconditioner& p)
    : base_(base), pa_(base.a()), pb_(base.b()), kappa_pa_(0.0), sigma_max_pa_(0.0) {
  if (p.size() != base.dim() || p.side() != Side::left) {
    throw InvalidArgument("preconditioned_problem: need a left preconditioner of size n");
  }
  pa_ = p.apply(base.a());
  for (std::size_t i = 0; i < pb_.size(); ++i) pb_[i] *= p.diag()[i];
  const auto s = singular_values(pa_);
  kappa_pa_ = condition_from_sigma(s);
  sigma_max_pa_ = s.front();
}

double PreconditionedQuadratic::loss(std::span<const double> theta) const {
  check_len(theta, pb_.size(), "loss");
  return dot(theta, matvec(pa_, theta)) - dot(pb_, theta);
}

Vector PreconditionedQuadratic::gradient(std::span<const double> theta) const {
  check_len(theta, pb_.size(), "gradient");
  Vector g = matvec(pa_, theta);
  const Vector gt = matvec(transpose(pa_), theta);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += gt[i] - pb_[i];
  return g;
}

Vector PreconditionedQuadratic::residual(std::span<const double> theta) const {
  check_len(theta, pb_.size(), "residual");
  Vector r = matvec(pa_, theta);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= pb_[i];
  return r;
}

PreconditionedQuadratic preconditioned_problem(const QuadraticProblem& p,
                                               const DiagonalPreconditioner& pc) {
  return PreconditionedQuadratic(p, pc);
}

GDTrace run_gd(const PreconditionedQuadratic& p, std::span<const double> theta0, double eta,
               std::size_t iters) {
  return descend(p.base(), theta0, eta, iters, [&](const Vector& th) { return p.residual(th); });
}

std::size_t iterations_to_tolerance(const GDTrace& trace, double optimum_loss, double tol) {
  for (std::size_t t = 0; t < trace.losses.size(); ++t) {
    if (trace.diverged && t + 1 == trace.losses.size()) break;
    if (trace.losses[t] - optimum_loss <= tol) return t;
  }
  return kNotReached;
}

void write_gd_trace_csv(std::ostream& out, const GDTrace& trace) {
  const auto old = out.precision(17);
  out << "# eta=" << trace.eta << " kappa=" << trace.kappa
      << " diverged=" << (trace.diverged ? "true" : "false") << " sigma=";
  for (std::size_t i = 0; i < trace.sigma.size(); ++i) out << (i ? ";" : "") << trace.sigma[i];
  out << '\n';
  out << "iter,loss,theta_norm";
  const std::size_t n = trace.sigma.size();
  for (std::size_t i = 0; i < n; ++i) out << ",mode_" << i;
  out << '\n';
  for (std::size_t t = 0; t < trace.iterates.size(); ++t) {
    out << t << ',' << trace.losses[t] << ',' << norm2(trace.iterates[t]);
    for (double x : trace.mode_coeffs[t]) out << ',' << x;
    out << '\n';
  }
  out.precision(old);
}

}  // namespace wcond
