#include "wcond/rng.hpp"

#include <cmath>
#include <numbers>

namespace wcond {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix(splitmix(seed) ^ splitmix(stream + 0x632be59bd9b4e019ULL));
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
  return derive_seed(seed, fnv1a64(stream));
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw InvalidArgument("Rng::below: n must be positive");
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

double Rng::log_uniform(double lo, double hi) {
  if (!(lo > 0.0 && hi >= lo)) throw InvalidArgument("Rng::log_uniform: need 0 < lo <= hi");
  return std::exp(uniform(std::log(lo), std::log(hi)));
}

Matrix Rng::uniform_matrix(std::size_t rows, std::size_t cols, double lo, double hi) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = uniform(lo, hi);
  return m;
}

Matrix Rng::normal_matrix(std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = normal();
  return m;
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = below(i);
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

Matrix random_orthogonal(Rng& rng, std::size_t n) {
  Matrix g = rng.normal_matrix(n, n);
  // Orthonormalize columns.
  for (std::size_t j = 0; j < n; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        double proj = 0.0;
        for (std::size_t i = 0; i < n; ++i) proj += g(i, j) * g(i, k);
        for (std::size_t i = 0; i < n; ++i) g(i, j) -= proj * g(i, k);
      }
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += g(i, j) * g(i, j);
    nrm = std::sqrt(nrm);
    for (std::size_t i = 0; i < n; ++i) g(i, j) /= nrm;
  }
  return g;
}

Matrix random_spd(Rng& rng, std::size_t n, double kappa, double top) {
  if (!(kappa >= 1.0)) throw InvalidArgument("random_spd: kappa must be >= 1");
  const Matrix q = random_orthogonal(rng, n);
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double frac = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    eig[i] = top * std::pow(kappa, -frac);
  }
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += q(i, k) * eig[k] * q(j, k);
      a(i, j) = s;
      a(j, i) = s;
    }
  return a;
}

}  // namespace wcond
