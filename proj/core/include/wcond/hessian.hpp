#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wcond/matrix.hpp"
#include "wcond/net/dataset.hpp"
#include "wcond/net/loss.hpp"
#include "wcond/net/network.hpp"
#include "wcond/net/train.hpp"

namespace wcond {

/// Scalar loss over a flat parameter vector with its analytic gradient.
struct Objective {
  std::size_t dim = 0;
  std::function<double(std::span<const double>)> value;
  std::function<Vector(std::span<const double>)> gradient;
};

inline constexpr std::size_t kMaxHessianDim = 2000;

struct GradientCheck {
  double max_rel_error = 0.0;
  std::size_t directions = 0;
};

/// Central-difference directional derivatives along `directions` random unit
/// vectors against gradient . d. Relative error is |fd - an| / max(|fd|, |an|, 1e-6).
GradientCheck check_gradient(const Objective& f, std::span<const double> theta,
                             std::size_t directions, std::uint64_t seed);

struct HessianEstimate {
  Matrix h;  // symmetrized
  Vector theta;
  Vector step_sizes;
  double grad_norm = 0.0;
  /// ||H - H^T||_F of the raw difference quotient, before symmetrization.
  double asymmetry = 0.0;
};

/// Column i is (g(theta + h_i e_i) - g(theta - h_i e_i)) / (2 h_i) with
/// h_i = cbrt(eps) * max(1, |theta_i|); the result is (H + H^T) / 2.
/// The gradient is self-checked first (3 directions, 1e-5 relative); a failure
/// raises GradientCheckError.
HessianEstimate fd_hessian(const Objective& f, std::span<const double> theta);

/// Loss-only second differences, O(n^2) evaluations. Kept as an independent
/// cross-check on tiny problems.
Matrix fd_hessian_loss_only(const Objective& f, std::span<const double> theta);

inline constexpr double kHessianRankTol = 1e-8;

struct HessianKappa {
  bool full_rank = false;
  double kappa = 0.0;         // sigma_1 / sigma_n when full_rank
  std::size_t surviving = 0;  // singular values above rank_tol * sigma_1
  double pseudo_kappa = 0.0;  // sigma_1 / smallest surviving value
  double sigma_max = 0.0;
  double sigma_min = 0.0;
};

HessianKappa hessian_kappa(const Matrix& h, double rank_tol = kHessianRankTol);

/// L(theta) of `net` (parameters replaced by theta) on the whole dataset.
Objective network_objective(const net::Network& net, const net::Dataset& data,
                            net::LossKind loss, net::Phase phase = net::Phase::train);

struct KappaComparison {
  std::uint64_t theta_seed = 0;
  std::string phase;  // "init" or "sgd_25" / "sgd_50" / "sgd_75"
  double kappa_plain = 0.0;
  double kappa_eq = 0.0;
  bool rank_ok_plain = false;
  bool rank_ok_eq = false;
  double rank_tol = kHessianRankTol;
  std::size_t surviving_plain = 0;
  std::size_t surviving_eq = 0;
  /// False when either gradient failed its self-check at theta; such points
  /// are kept but never count as full rank.
  bool gradient_check_ok = true;

  bool both_full_rank() const { return rank_ok_plain && rank_ok_eq; }
};

struct Theorem2Config {
  std::vector<net::LayerSpec> arch;  // conditioning fields are overridden
  net::LossKind loss = net::LossKind::mse;
  std::size_t n_points = 40;
  std::uint64_t seed = 0;
  double rank_tol = kHessianRankTol;
  double tolerance = 1e-6;  // kappa_eq <= kappa_plain * (1 + tolerance)
  /// Reference run for the mid-training snapshots.
  net::TrainOptions reference;
};

struct Theorem2Result {
  /// Every sampled point, including rank-deficient ones.
  std::vector<KappaComparison> points;
  /// Points where both Hessians are numerically full rank.
  std::vector<KappaComparison> comparisons() const;
  std::size_t satisfied = 0;
  double satisfied_fraction() const;
  /// Full-rank points with kappa_eq > kappa_plain * (1 + tolerance).
  std::vector<KappaComparison> violations;
};

/// Same theta fed to the plain loss and to the reparameterized equilibrated
/// loss. Half the points are fresh initializations, half are SGD snapshots at
/// 25/50/75% of a reference run on the plain network. n_points = 0 gives an
/// empty result; if every point is rank-deficient a std::runtime_error asks
/// for a smaller net or a looser rank_tol.
Theorem2Result compare_theorem2(const Theorem2Config& config, const net::Dataset& data);

inline constexpr std::string_view kKappaComparisonHeader =
    "seed,phase,kappa_plain,kappa_eq,rank_ok_plain,rank_ok_eq";
void write_kappa_comparisons_csv(std::ostream& out, const std::vector<KappaComparison>& rows);

}  // namespace wcond
