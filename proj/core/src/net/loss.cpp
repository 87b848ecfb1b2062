#include "wcond/net/loss.hpp"

#include <cmath>

namespace wcond::net {

namespace {

void check_shapes(const Matrix& a, const Matrix& b, const char* where) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument(std::string(where) + ": prediction/target shape mismatch");
  }
}

}  // namespace

std::string_view to_string(LossKind k) { return k == LossKind::mse ? "mse" : "bce"; }

std::optional<LossKind> parse_loss(std::string_view s) {
  if (s == "mse") return LossKind::mse;
  if (s == "bce") return LossKind::bce;
  return std::nullopt;
}

LossValue mse_loss(const Matrix& pred, const Matrix& target) {
  check_shapes(pred, target, "mse_loss");
  LossValue out{0.0, pred};
  const double inv = 1.0 / static_cast<double>(pred.size());
  const auto p = pred.data();
  const auto t = target.data();
  auto g = out.grad.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - t[i];
    out.value += d * d;
    g[i] = 2.0 * d * inv;
  }
  out.value *= inv;
  return out;
}

LossValue bce_logits_loss(const Matrix& logits, const Matrix& target) {
  check_shapes(logits, target, "bce_logits_loss");
  LossValue out{0.0, logits};
  const double inv = 1.0 / static_cast<double>(logits.size());
  const auto z = logits.data();
  const auto y = target.data();
  auto g = out.grad.data();
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double zi = z[i];
    out.value += std::max(zi, 0.0) - zi * y[i] + std::log1p(std::exp(-std::abs(zi)));
    const double sig = zi >= 0.0 ? 1.0 / (1.0 + std::exp(-zi))
                                 : std::exp(zi) / (1.0 + std::exp(zi));
    g[i] = (sig - y[i]) * inv;
  }
  out.value *= inv;
  return out;
}

LossValue evaluate_loss(LossKind kind, const Matrix& pred, const Matrix& target) {
  return kind == LossKind::mse ? mse_loss(pred, target) : bce_logits_loss(pred, target);
}

double binary_accuracy(const Matrix& logits, const Matrix& target) {
  check_shapes(logits, target, "binary_accuracy");
  const auto z = logits.data();
  const auto y = target.data();
  std::size_t hit = 0;
  for (std::size_t i = 0; i < z.size(); ++i) hit += (z[i] > 0.0) == (y[i] > 0.5);
  return static_cast<double>(hit) / static_cast<double>(z.size());
}

}  // namespace wcond::net
