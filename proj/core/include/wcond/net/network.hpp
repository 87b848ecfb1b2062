#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wcond/matrix.hpp"
#include "wcond/net/layer.hpp"
#include "wcond/net/normalization.hpp"

namespace wcond::net {

/// Per-layer forward intermediates kept for backprop.
struct LayerCache {
  Matrix input;    // N x input_width
  Matrix patches;  // (N*P) x fan_in; equals input for dense layers
  std::optional<StandardizeCache> standardize;
  std::optional<GainNormCache> gain_norm;
  std::optional<RowUnitCache> equilibrate;  // rows of U, or rows of U^T for input_rows
  Matrix u_eff;                             // units x fan_in
  std::optional<BatchNormCache> bn;
  Matrix act_in;   // (N*P) x units, after batch norm
  Matrix act_out;  // (N*P) x units, after the activation
};

struct ForwardResult {
  Matrix output;
  std::vector<LayerCache> layers;
  Phase phase = Phase::train;
  /// Equilibration floor hits during this pass, as "layer k unit u".
  std::vector<std::string> floor_log;
};

struct LayerParams {
  std::span<double> weight;  // dense: n_in x n_out row-major; conv: out x (in*k*k)
  std::span<double> bias;
  std::span<double> gain;    // weight-normalization gain, empty otherwise
  std::span<double> gamma;   // batch-norm scale, empty otherwise
  std::span<double> beta;
};

struct ConstLayerParams {
  std::span<const double> weight;
  std::span<const double> bias;
  std::span<const double> gain;
  std::span<const double> gamma;
  std::span<const double> beta;
};

/// Feed-forward network F_k = phi(F_{k-1} W_k + b_k), last layer without phi.
///
/// All trainable parameters live in one flat vector so that losses can be
/// treated as functions of theta. Batch-norm running statistics are buffers
/// kept beside it.
class Network {
 public:
  Network(std::vector<LayerSpec> specs, std::uint64_t seed);

  const std::vector<LayerSpec>& specs() const noexcept { return specs_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t layer_count() const noexcept { return specs_.size(); }
  std::size_t input_width() const { return specs_.front().input_width(); }
  std::size_t output_width() const { return specs_.back().output_width(); }

  std::size_t param_count() const noexcept { return params_.size(); }
  std::span<const double> params() const noexcept { return params_; }
  std::span<double> params() noexcept { return params_; }
  void set_params(std::span<const double> theta);

  LayerParams layer_params(std::size_t k);
  ConstLayerParams layer_params(std::size_t k) const;
  std::size_t layer_offset(std::size_t k) const { return offsets_.at(k); }

  /// Stored weight as the n_{k-1} x n_k dense-equivalent matrix (for conv
  /// layers: the transpose of the unrolled kernel).
  Matrix weight(std::size_t k) const;
  void set_weight(std::size_t k, const Matrix& w);
  /// Weight actually used in the forward pass, same layout as weight().
  Matrix effective_weight(std::size_t k) const;

  std::vector<BatchNormState>& bn_states() noexcept { return bn_; }
  const std::vector<BatchNormState>& bn_states() const noexcept { return bn_; }

  ForwardResult forward(const Matrix& x, Phase phase = Phase::train) const;
  /// Gradient of a scalar loss w.r.t. params() given dLoss/dOutput.
  Vector backward(const ForwardResult& fr, const Matrix& d_output) const;

  /// Same parameters, every layer switched to conditioning `c`.
  Network with_conditioning(Conditioning c) const;

 private:
  Matrix raw_units(std::size_t k) const;
  Matrix effective_units(std::size_t k, LayerCache* cache, std::vector<std::string>* log) const;

  std::vector<LayerSpec> specs_;
  std::uint64_t seed_;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;
  std::vector<BatchNormState> bn_;
};

/// Replaces every stored W_k by its equilibrated version (along the layer's
/// axis, floor 1e-12) and tags the layers equilibrate_static. Biases and the
/// parameter count are unchanged. Floor hits are appended to `log`.
Network condition_weights(const Network& net, std::vector<std::string>* log = nullptr);

/// The preconditioned dense-equivalent weight E_k W_k for a given axis:
/// column equilibration for output_units, row equilibration for input_rows.
Matrix equilibrated(const Matrix& w, EquilibrationAxis axis);

}  // namespace wcond::net
