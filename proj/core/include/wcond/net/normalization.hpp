#pragma once

#include <span>
#include <utility>
#include <vector>

#include "wcond/matrix.hpp"

namespace wcond::net {

// Weight transforms work on a unit-major matrix U (units x fan_in): row u is
// the fan-in vector of output unit u. For a dense layer U = W^T, for a conv
// layer U is the unrolled kernel.

inline constexpr double kWeightStdEps = 1e-5;
inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kEquilibrationFloor = 1e-12;

/// Rows scaled to unit 2-norm: r / max(||r||, floor).
struct RowUnitCache {
  Matrix out;
  std::vector<double> norms;  // max(||r||, floor)
  std::vector<bool> floored;
};
RowUnitCache unit_rows(const Matrix& u, double floor = kEquilibrationFloor);
/// Pulls d(out) back through unit_rows: (I - r_hat r_hat^T) / ||r|| per row,
/// or plain division by the floor where it was applied.
Matrix unit_rows_backward(const RowUnitCache& cache, const Matrix& d_out);

/// Rows to mean 0 / variance 1 (population variance, eps inside the sqrt).
struct StandardizeCache {
  Matrix out;
  std::vector<double> inv_std;
};
StandardizeCache standardize_rows(const Matrix& u, double eps = kWeightStdEps);
Matrix standardize_rows_backward(const StandardizeCache& cache, const Matrix& d_out);

/// w_u = g_u * v_u / ||v_u||.
struct GainNormCache {
  Matrix out;
  Matrix direction;
  std::vector<double> norms;
  std::vector<double> gain;
};
GainNormCache gain_normalize_rows(const Matrix& v, std::span<const double> gain);
/// Returns (dv, dg).
std::pair<Matrix, Vector> gain_normalize_rows_backward(const GainNormCache& cache,
                                                       const Matrix& d_out);

/// Weight standardization of a dense weight W (n_in x n_out): each column,
/// the fan-in of one output unit, is mapped to mean 0 and variance 1.
Matrix weight_standardize(const Matrix& w, double eps = kWeightStdEps);

/// Weight normalization of a dense weight: column j becomes g_j v_j / ||v_j||.
Matrix weight_normalize(const Matrix& v, std::span<const double> g);

/// ||v_j|| per column, the gain that makes weight_normalize the identity.
Vector weight_norm_init_gain(const Matrix& v);

struct BatchNormState {
  Vector running_mean;
  Vector running_var;
};

enum class Phase { train, eval };

struct BatchNormCache {
  Matrix normalized;  // x_hat
  Vector mean;
  Vector var;
  Vector inv_std;
  Phase phase = Phase::train;
};

/// Per-column normalization of x (rows are samples or sample-positions).
/// Train phase uses batch statistics and needs at least two rows; eval phase
/// uses the running statistics. Returns (gamma * x_hat + beta, cache).
std::pair<Matrix, BatchNormCache> batch_norm(const Matrix& x, std::span<const double> gamma,
                                             std::span<const double> beta,
                                             const BatchNormState& running, Phase phase,
                                             double eps = kBatchNormEps);

struct BatchNormGrads {
  Matrix dx;
  Vector dgamma;
  Vector dbeta;
};
BatchNormGrads batch_norm_backward(const BatchNormCache& cache, std::span<const double> gamma,
                                   const Matrix& d_out);

/// running <- (1 - momentum) * running + momentum * batch (unbiased batch variance).
void update_running_stats(BatchNormState& state, const BatchNormCache& cache, std::size_t rows,
                          double momentum);

}  // namespace wcond::net
