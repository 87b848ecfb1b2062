#include "wcond/net/normalization.hpp"

#include <cmath>

namespace wcond::net {

RowUnitCache unit_rows(const Matrix& u, double floor) {
  RowUnitCache c{u, std::vector<double>(u.rows()), std::vector<bool>(u.rows(), false)};
  for (std::size_t i = 0; i < u.rows(); ++i) {
    double n = norm2(u.row(i));
    if (n < floor) {
      n = floor;
      c.floored[i] = true;
    }
    if (n == 0.0) throw ZeroRowError("unit_rows", i);
    c.norms[i] = n;
    for (double& x : c.out.row(i)) x /= n;
  }
  return c;
}

Matrix unit_rows_backward(const RowUnitCache& cache, const Matrix& d_out) {
  Matrix dv = d_out;
  for (std::size_t i = 0; i < d_out.rows(); ++i) {
    const double n = cache.norms[i];
    auto row = dv.row(i);
    if (cache.floored[i]) {
      for (double& x : row) x /= n;
      continue;
    }
    const auto what = cache.out.row(i);
    const double radial = dot(what, d_out.row(i));
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - what[j] * radial) / n;
  }
  return dv;
}

StandardizeCache standardize_rows(const Matrix& u, double eps) {
  StandardizeCache c{u, std::vector<double>(u.rows())};
  const double m = static_cast<double>(u.cols());
  for (std::size_t i = 0; i < u.rows(); ++i) {
    auto r = c.out.row(i);
    double mean = 0.0;
    for (double x : r) mean += x;
    mean /= m;
    double var = 0.0;
    for (double x : r) var += (x - mean) * (x - mean);
    var /= m;
    const double inv = 1.0 / std::sqrt(var + eps);
    c.inv_std[i] = inv;
    for (double& x : r) x = (x - mean) * inv;
  }
  return c;
}

Matrix standardize_rows_backward(const StandardizeCache& cache, const Matrix& d_out) {
  Matrix dv = d_out;
  const double m = static_cast<double>(d_out.cols());
  for (std::size_t i = 0; i < d_out.rows(); ++i) {
    const auto w = cache.out.row(i);
    const auto g = d_out.row(i);
    double mean_g = 0.0;
    double mean_gw = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      mean_g += g[j];
      mean_gw += g[j] * w[j];
    }
    mean_g /= m;
    mean_gw /= m;
    auto out = dv.row(i);
    for (std::size_t j = 0; j < g.size(); ++j) {
      out[j] = cache.inv_std[i] * (g[j] - mean_g - w[j] * mean_gw);
    }
  }
  return dv;
}

GainNormCache gain_normalize_rows(const Matrix& v, std::span<const double> gain) {
  if (gain.size() != v.rows()) throw InvalidArgument("gain_normalize_rows: gain length mismatch");
  GainNormCache c{v, v, std::vector<double>(v.rows()),
                  std::vector<double>(gain.begin(), gain.end())};
  for (std::size_t i = 0; i < v.rows(); ++i) {
    const double n = norm2(v.row(i));
    if (n == 0.0) throw ZeroRowError("weight_normalize", i);
    c.norms[i] = n;
    auto d = c.direction.row(i);
    auto o = c.out.row(i);
    for (std::size_t j = 0; j < d.size(); ++j) {
      d[j] /= n;
      o[j] = gain[i] * d[j];
    }
  }
  return c;
}

std::pair<Matrix, Vector> gain_normalize_rows_backward(const GainNormCache& cache,
                                                       const Matrix& d_out) {
  Matrix dv = d_out;
  Vector dg(d_out.rows());
  for (std::size_t i = 0; i < d_out.rows(); ++i) {
    const auto dir = cache.direction.row(i);
    const double radial = dot(dir, d_out.row(i));
    dg[i] = radial;
    const double s = cache.gain[i] / cache.norms[i];
    auto r = dv.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = s * (r[j] - dir[j] * radial);
  }
  return {std::move(dv), std::move(dg)};
}

Matrix weight_standardize(const Matrix& w, double eps) {
  return transpose(standardize_rows(transpose(w), eps).out);
}

Matrix weight_normalize(const Matrix& v, std::span<const double> g) {
  return transpose(gain_normalize_rows(transpose(v), g).out);
}

Vector weight_norm_init_gain(const Matrix& v) { return col_norms2(v); }

std::pair<Matrix, BatchNormCache> batch_norm(const Matrix& x, std::span<const double> gamma,
                                             std::span<const double> beta,
                                             const BatchNormState& running, Phase phase,
                                             double eps) {
  const std::size_t n = x.rows();
  const std::size_t f = x.cols();
  if (gamma.size() != f || beta.size() != f) {
    throw InvalidArgument("batch_norm: gamma/beta length must equal feature count");
  }
  BatchNormCache c{x, Vector(f, 0.0), Vector(f, 0.0), Vector(f, 0.0), phase};
  if (phase == Phase::train) {
    if (n < 2) throw InvalidArgument("batch_norm: training mode needs batch size >= 2");
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = x.row(i);
      for (std::size_t j = 0; j < f; ++j) c.mean[j] += r[j];
    }
    for (double& m : c.mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = x.row(i);
      for (std::size_t j = 0; j < f; ++j) {
        const double d = r[j] - c.mean[j];
        c.var[j] += d * d;
      }
    }
    for (double& v : c.var) v /= static_cast<double>(n);
  } else {
    if (running.running_mean.size() != f || running.running_var.size() != f) {
      throw InvalidArgument("batch_norm: running statistics have the wrong length");
    }
    c.mean = running.running_mean;
    c.var = running.running_var;
  }
  for (std::size_t j = 0; j < f; ++j) c.inv_std[j] = 1.0 / std::sqrt(c.var[j] + eps);

  Matrix y = x;
  for (std::size_t i = 0; i < n; ++i) {
    auto xh = c.normalized.row(i);
    auto yr = y.row(i);
    for (std::size_t j = 0; j < f; ++j) {
      xh[j] = (xh[j] - c.mean[j]) * c.inv_std[j];
      yr[j] = gamma[j] * xh[j] + beta[j];
    }
  }
  return {std::move(y), std::move(c)};
}

BatchNormGrads batch_norm_backward(const BatchNormCache& cache, std::span<const double> gamma,
                                   const Matrix& d_out) {
  const std::size_t n = d_out.rows();
  const std::size_t f = d_out.cols();
  BatchNormGrads g{d_out, Vector(f, 0.0), Vector(f, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto dy = d_out.row(i);
    const auto xh = cache.normalized.row(i);
    for (std::size_t j = 0; j < f; ++j) {
      g.dbeta[j] += dy[j];
      g.dgamma[j] += dy[j] * xh[j];
    }
  }
  if (cache.phase == Phase::eval) {
    for (std::size_t i = 0; i < n; ++i) {
      auto dx = g.dx.row(i);
      for (std::size_t j = 0; j < f; ++j) dx[j] *= gamma[j] * cache.inv_std[j];
    }
    return g;
  }
  const double nn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xh = cache.normalized.row(i);
    auto dx = g.dx.row(i);
    for (std::size_t j = 0; j < f; ++j) {
      dx[j] = gamma[j] * cache.inv_std[j] / nn *
              (nn * dx[j] - g.dbeta[j] - xh[j] * g.dgamma[j]);
    }
  }
  return g;
}

void update_running_stats(BatchNormState& state, const BatchNormCache& cache, std::size_t rows,
                          double momentum) {
  const double unbias = rows > 1 ? static_cast<double>(rows) / static_cast<double>(rows - 1) : 1.0;
  for (std::size_t j = 0; j < state.running_mean.size(); ++j) {
    state.running_mean[j] = (1.0 - momentum) * state.running_mean[j] + momentum * cache.mean[j];
    state.running_var[j] =
        (1.0 - momentum) * state.running_var[j] + momentum * cache.var[j] * unbias;
  }
}

}  // namespace wcond::net
