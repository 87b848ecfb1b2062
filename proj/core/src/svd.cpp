#include "wcond/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace wcond {

namespace {

constexpr int kMaxSweeps = 60;
constexpr double kOrthTol = 1e-15;

// Column-major working copy: cols[j] is column j of a tall matrix.
struct JacobiState {
  std::size_t m = 0;                  // column length
  std::size_t n = 0;                  // number of columns
  std::vector<std::vector<double>> a;  // n columns of length m
  std::vector<std::vector<double>> v;  // n columns of length n (empty if not accumulated)
  int sweeps = 0;
};

JacobiState run_jacobi(const Matrix& tall, bool accumulate_v) {
  JacobiState s;
  s.m = tall.rows();
  s.n = tall.cols();
  s.a.assign(s.n, std::vector<double>(s.m));
  for (std::size_t i = 0; i < s.m; ++i)
    for (std::size_t j = 0; j < s.n; ++j) s.a[j][i] = tall(i, j);
  if (accumulate_v) {
    s.v.assign(s.n, std::vector<double>(s.n, 0.0));
    for (std::size_t j = 0; j < s.n; ++j) s.v[j][j] = 1.0;
  }

  std::vector<double> norms(s.n);
  for (std::size_t j = 0; j < s.n; ++j) norms[j] = dot(s.a[j], s.a[j]);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < s.n; ++p) {
      for (std::size_t q = p + 1; q < s.n; ++q) {
        const double alpha = norms[p];
        const double beta = norms[q];
        if (alpha == 0.0 || beta == 0.0) continue;
        const double gamma = dot(s.a[p], s.a[q]);
        if (std::abs(gamma) <= kOrthTol * std::sqrt(alpha) * std::sqrt(beta)) continue;
        rotated = true;

        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = c * t;

        auto& ap = s.a[p];
        auto& aq = s.a[q];
        for (std::size_t i = 0; i < s.m; ++i) {
          const double x = ap[i];
          const double y = aq[i];
          ap[i] = c * x - sn * y;
          aq[i] = sn * x + c * y;
        }
        if (accumulate_v) {
          auto& vp = s.v[p];
          auto& vq = s.v[q];
          for (std::size_t i = 0; i < s.n; ++i) {
            const double x = vp[i];
            const double y = vq[i];
            vp[i] = c * x - sn * y;
            vq[i] = sn * x + c * y;
          }
        }
        // Recompute rather than update; the closed-form update drifts for
        // nearly dependent columns.
        norms[p] = dot(ap, ap);
        norms[q] = dot(aq, aq);
      }
    }
    s.sweeps = sweep + 1;
    if (!rotated) return s;
  }
  throw ConvergenceError("svd: one-sided Jacobi did not converge in 60 sweeps");
}

std::vector<std::size_t> descending_order(const std::vector<double>& sigma) {
  std::vector<std::size_t> idx(sigma.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });
  return idx;
}

// Completes columns of `q` (m x k, given as k column vectors; entries flagged
// in `missing` are to be filled) to an orthonormal set.
void complete_orthonormal(std::vector<std::vector<double>>& q, const std::vector<bool>& missing,
                          std::size_t m) {
  std::size_t next_unit = 0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (!missing[j]) continue;
    while (next_unit < m) {
      std::vector<double> cand(m, 0.0);
      cand[next_unit++] = 1.0;
      // Two passes of Gram-Schmidt.
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < q.size(); ++k) {
          if (k == j || (missing[k] && k > j)) continue;
          const double proj = dot(cand, q[k]);
          for (std::size_t i = 0; i < m; ++i) cand[i] -= proj * q[k][i];
        }
      }
      const double nrm = norm2(cand);
      if (nrm > 1e-8) {
        for (double& x : cand) x /= nrm;
        q[j] = std::move(cand);
        break;
      }
    }
  }
}

}  // namespace

SvdResult svd(const Matrix& a) {
  const bool wide = a.rows() < a.cols();
  const Matrix tall = wide ? transpose(a) : a;
  JacobiState st = run_jacobi(tall, /*accumulate_v=*/true);

  const std::size_t m = st.m;
  const std::size_t k = st.n;
  std::vector<double> sig(k);
  for (std::size_t j = 0; j < k; ++j) sig[j] = norm2(st.a[j]);
  const auto order = descending_order(sig);
  const double negligible =
      sig.empty() ? 0.0
                  : sig[order.front()] * static_cast<double>(std::max(m, k)) *
                        std::numeric_limits<double>::epsilon();

  std::vector<double> sigma(k);
  std::vector<std::vector<double>> ucols(k);
  std::vector<std::vector<double>> vcols(k);
  std::vector<bool> missing(k, false);
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t j = order[r];
    sigma[r] = sig[j];
    vcols[r] = st.v[j];
    if (sig[j] <= negligible) {
      ucols[r].assign(m, 0.0);
      missing[r] = true;
    } else {
      ucols[r].resize(m);
      for (std::size_t i = 0; i < m; ++i) ucols[r][i] = st.a[j][i] / sig[j];
    }
  }
  // Columns of tiny singular values inherit roundoff of order eps*sigma_1/sigma_r
  // in their direction; re-orthogonalize them against the earlier columns.
  for (std::size_t r = 0; r < k; ++r) {
    if (missing[r] || sigma[r] >= 1e-8 * sigma.front()) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t q = 0; q < r; ++q) {
        if (missing[q]) continue;
        const double proj = dot(ucols[r], ucols[q]);
        for (std::size_t i = 0; i < m; ++i) ucols[r][i] -= proj * ucols[q][i];
      }
    }
    const double nrm = norm2(ucols[r]);
    if (nrm < 0.5) {
      missing[r] = true;
      continue;
    }
    for (double& x : ucols[r]) x /= nrm;
  }
  complete_orthonormal(ucols, missing, m);

  // tall = U S V^T. For wide input a = tall^T = V S U^T.
  Matrix left(wide ? k : m, k);
  Matrix right_t(k, wide ? m : k);
  const auto& lcols = wide ? vcols : ucols;
  const auto& rcols = wide ? ucols : vcols;
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t i = 0; i < left.rows(); ++i) left(i, r) = lcols[r][i];
    for (std::size_t i = 0; i < right_t.cols(); ++i) right_t(r, i) = rcols[r][i];
  }
  // Sign convention: the first nonzero entry of each right singular vector is positive.
  for (std::size_t r = 0; r < k; ++r) {
    const auto row = right_t.row(r);
    const auto it = std::find_if(row.begin(), row.end(), [](double x) { return x != 0.0; });
    if (it == row.end() || *it > 0.0) continue;
    for (double& x : right_t.row(r)) x = -x;
    for (std::size_t i = 0; i < left.rows(); ++i) left(i, r) = -left(i, r);
  }
  return SvdResult{std::move(left), std::move(sigma), std::move(right_t), st.sweeps};
}

std::vector<double> singular_values(const Matrix& a) {
  const Matrix tall = a.rows() < a.cols() ? transpose(a) : a;
  JacobiState st = run_jacobi(tall, /*accumulate_v=*/false);
  std::vector<double> sig(st.n);
  for (std::size_t j = 0; j < st.n; ++j) sig[j] = norm2(st.a[j]);
  std::sort(sig.begin(), sig.end(), std::greater<>());
  return sig;
}

double condition_from_sigma(const std::vector<double>& sigma, double rank_tol) {
  if (!(rank_tol > 0.0 && rank_tol < 1.0)) {
    throw InvalidArgument("condition_number: rank_tol must lie in (0, 1)");
  }
  if (sigma.empty() || sigma.front() == 0.0) {
    throw InvalidArgument("condition_number: zero matrix");
  }
  const double smax = sigma.front();
  const double smin = sigma.back();
  if (smin <= rank_tol * smax) throw RankDeficientError(smax, smin);
  return smax / smin;
}

double condition_number(const Matrix& a, double rank_tol) {
  return condition_from_sigma(singular_values(a), rank_tol);
}

}  // namespace wcond
