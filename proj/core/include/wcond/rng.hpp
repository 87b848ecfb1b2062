#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "wcond/matrix.hpp"

namespace wcond {

/// 64-bit FNV-1a over raw bytes; `h` continues a running hash.
inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset);

/// Mixes a base seed with a stream id (splitmix64 finalizer). Used to give
/// every trial/arm its own stream so results do not depend on schedule.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

/// Seeded generator. Draws are mapped to doubles by hand rather than through
/// <random> distributions, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller, one value per call).
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Log-uniform in [lo, hi], lo > 0.
  double log_uniform(double lo, double hi);

  Matrix uniform_matrix(std::size_t rows, std::size_t cols, double lo, double hi);
  Matrix normal_matrix(std::size_t rows, std::size_t cols);
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

/// Random orthogonal matrix (QR of a Gaussian matrix via modified Gram-Schmidt).
Matrix random_orthogonal(Rng& rng, std::size_t n);

/// Symmetric positive definite matrix Q diag(sigma) Q^T with log-spaced
/// eigenvalues from 1 up to kappa, scaled so the largest equals `top`.
Matrix random_spd(Rng& rng, std::size_t n, double kappa, double top = 1.0);

}  // namespace wcond
