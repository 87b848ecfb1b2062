#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "wcond/matrix.hpp"
#include "wcond/precond.hpp"
#include "wcond/svd.hpp"

namespace wcond {

/// L(theta) = 1/2 theta^T A theta - b^T theta with A symmetric and full rank.
class QuadraticProblem {
 public:
  QuadraticProblem(Matrix a, Vector b);

  const Matrix& a() const noexcept { return a_; }
  const Vector& b() const noexcept { return b_; }
  std::size_t dim() const noexcept { return b_.size(); }

  double loss(std::span<const double> theta) const;
  Vector gradient(std::span<const double> theta) const;
  /// The Hessian of L is A everywhere.
  const Matrix& hessian() const noexcept { return a_; }

  /// A^-1 b via Cholesky; requires A positive definite.
  Vector minimizer() const;

  const SvdResult& svd() const noexcept { return svd_; }
  const std::vector<double>& sigma() const noexcept { return svd_.sigma; }
  double kappa() const noexcept { return svd_.sigma.front() / svd_.sigma.back(); }

 private:
  Matrix a_;
  Vector b_;
  SvdResult svd_;
};

struct GDTrace {
  std::vector<Vector> iterates;
  std::vector<double> losses;
  /// x^t = V^T (theta^t - theta*) per recorded iterate.
  std::vector<Vector> mode_coeffs;
  double eta = 0.0;
  std::vector<double> sigma;
  double kappa = 0.0;
  bool diverged = false;

  std::size_t iterations() const noexcept { return iterates.empty() ? 0 : iterates.size() - 1; }
};

inline constexpr double kDivergenceNorm = 1e12;
inline constexpr std::size_t kMaxGdIterations = 1'000'000;

/// theta <- theta - eta * (A theta - b). Stops early with diverged=true once
/// ||theta|| > 1e12 or anything turns non-finite.
GDTrace run_gd(const QuadraticProblem& p, std::span<const double> theta0, double eta,
               std::size_t iters);

/// x_i^0 (1 - eta sigma_i)^t for each mode.
std::vector<double> predicted_modes(const QuadraticProblem& p, std::span<const double> theta0,
                                    double eta, std::size_t t);

/// 2 / sigma_1(A).
double max_stable_lr(const QuadraticProblem& p);

/// Largest relative gap between simulated and predicted mode coefficients.
/// A coefficient is compared when |predicted| >= abs_floor and
/// |predicted| >= rel_floor * max_j |predicted_j|: below that, roundoff
/// injected by the dominant modes (about eps * ||x^t|| per step) swamps it.
struct ModeAgreement {
  double max_rel_error = 0.0;
  std::size_t compared = 0;
  std::size_t skipped = 0;
};
ModeAgreement mode_agreement(const QuadraticProblem& p, const GDTrace& trace,
                             double abs_floor = 1e-12, double rel_floor = 1e-6);

/// The quadratic after left preconditioning by P.
///
/// `loss` evaluates theta^T (PA) theta - (Pb)^T theta literally and
/// `gradient` is its exact gradient ((PA) + (PA)^T) theta - Pb. Descent runs
/// on the preconditioned system PA x = Pb: the step direction is the residual
/// PA theta - Pb, which keeps the minimizer A^-1 b and contracts at the rates
/// set by the spectrum of PA.
class PreconditionedQuadratic {
 public:
  PreconditionedQuadratic(const QuadraticProblem& base, const DiagonalPreconditioner& p);

  const QuadraticProblem& base() const noexcept { return base_; }
  const Matrix& pa() const noexcept { return pa_; }
  const Vector& pb() const noexcept { return pb_; }

  double loss(std::span<const double> theta) const;
  Vector gradient(std::span<const double> theta) const;
  Vector residual(std::span<const double> theta) const;

  double kappa_pa() const noexcept { return kappa_pa_; }
  double kappa_a() const noexcept { return base_.kappa(); }
  double sigma_max_pa() const noexcept { return sigma_max_pa_; }

 private:
  QuadraticProblem base_;
  Matrix pa_;
  Vector pb_;
  double kappa_pa_;
  double sigma_max_pa_;
};

PreconditionedQuadratic preconditioned_problem(const QuadraticProblem& p,
                                               const DiagonalPreconditioner& pc);

/// Descent on PA x = Pb. Losses and mode coefficients refer to the base
/// problem so that arms are comparable.
GDTrace run_gd(const PreconditionedQuadratic& p, std::span<const double> theta0, double eta,
               std::size_t iters);

/// First t with L(theta^t) - L(theta*) <= tol, or nullopt-like npos when never reached.
inline constexpr std::size_t kNotReached = static_cast<std::size_t>(-1);
std::size_t iterations_to_tolerance(const GDTrace& trace, double optimum_loss, double tol);

/// CSV with a `#` metadata line: iter,loss,theta_norm,mode_0,...,mode_{n-1}.
void write_gd_trace_csv(std::ostream& out, const GDTrace& trace);

}  // namespace wcond
