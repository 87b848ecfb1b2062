#pragma once

#include <optional>
#include <string_view>

#include "wcond/matrix.hpp"

namespace wcond::net {

enum class LossKind { mse, bce };

std::string_view to_string(LossKind k);
std::optional<LossKind> parse_loss(std::string_view s);

struct LossValue {
  double value;
  Matrix grad;  // dLoss/dPrediction, same shape as the prediction
};

/// mean((pred - target)^2) over all entries.
LossValue mse_loss(const Matrix& pred, const Matrix& target);

/// Binary cross entropy on logits, mean over entries:
/// max(z, 0) - z*y + log1p(exp(-|z|)). Finite for any finite z.
LossValue bce_logits_loss(const Matrix& logits, const Matrix& target);

LossValue evaluate_loss(LossKind kind, const Matrix& pred, const Matrix& target);

/// Fraction of entries with (logit > 0) == (target > 0.5).
double binary_accuracy(const Matrix& logits, const Matrix& target);

}  // namespace wcond::net
