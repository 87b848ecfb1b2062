#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace wcond::net {

enum class Activation { identity, relu, tanh, sigmoid_output };

/// Reparameterizations of the weight itself (the batch-norm flag is separate
/// so that BN+WS and BN+W arms can be expressed).
enum class WeightNorm { none, standardize, normalize };

enum class Conditioning { none, equilibrate_static, equilibrate_reparam };

/// Which vectors of a layer's weight get unit 2-norm under equilibration.
///
/// output_units: each output unit's fan-in vector (a column of the
///   n_in x n_out dense weight, a filter row of the unrolled conv kernel).
/// input_rows: each row of the n_in x n_out dense weight, i.e. the fan-out
///   vector of one input unit.
enum class EquilibrationAxis { output_units, input_rows };

struct DenseShape {
  std::size_t in = 0;
  std::size_t out = 0;

  bool operator==(const DenseShape&) const = default;
};

/// Square-kernel 2-D convolution. Input and output are flattened
/// channel-major (C x H x W per sample).
struct ConvShape {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t in_height = 0;
  std::size_t in_width = 0;

  std::size_t out_height() const { return (in_height + 2 * padding - kernel) / stride + 1; }
  std::size_t out_width() const { return (in_width + 2 * padding - kernel) / stride + 1; }
  std::size_t positions() const { return out_height() * out_width(); }
  std::size_t patch_size() const { return in_channels * kernel * kernel; }

  bool operator==(const ConvShape&) const = default;
};

struct LayerSpec {
  std::variant<DenseShape, ConvShape> shape;
  Activation activation = Activation::identity;
  bool batch_norm = false;
  WeightNorm weight_norm = WeightNorm::none;
  Conditioning conditioning = Conditioning::none;
  EquilibrationAxis axis = EquilibrationAxis::output_units;

  bool is_conv() const { return std::holds_alternative<ConvShape>(shape); }
  const ConvShape& conv() const { return std::get<ConvShape>(shape); }

  /// Length of one unit's fan-in vector (n_in, or C*k*k for conv).
  std::size_t fan_in() const;
  /// Number of output units (n_out, or output channels).
  std::size_t units() const;
  /// Spatial positions per sample (1 for dense).
  std::size_t positions() const;
  /// Flattened per-sample input / output widths.
  std::size_t input_width() const;
  std::size_t output_width() const;

  std::size_t weight_count() const { return fan_in() * units(); }
  std::size_t param_count() const;

  bool operator==(const LayerSpec&) const = default;
};

LayerSpec dense(std::size_t in, std::size_t out, Activation act = Activation::identity);
LayerSpec conv2d(const ConvShape& shape, Activation act = Activation::relu);

std::string_view to_string(Activation a);
std::string_view to_string(WeightNorm w);
std::string_view to_string(Conditioning c);
std::string_view to_string(EquilibrationAxis a);
std::optional<Activation> parse_activation(std::string_view s);
std::optional<WeightNorm> parse_weight_norm(std::string_view s);
std::optional<Conditioning> parse_conditioning(std::string_view s);
std::optional<EquilibrationAxis> parse_axis(std::string_view s);

/// One-line textual form used by checkpoints, e.g.
/// `dense 2 8 tanh bn=0 wn=none cond=none axis=output_units`.
std::string describe(const LayerSpec& spec);
LayerSpec parse_layer(std::string_view line);

}  // namespace wcond::net
