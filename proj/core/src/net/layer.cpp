#include "wcond/net/layer.hpp"

#include <sstream>
#include <vector>

#include "wcond/errors.hpp"

namespace wcond::net {

std::size_t LayerSpec::fan_in() const {
  return is_conv() ? conv().patch_size() : std::get<DenseShape>(shape).in;
}

std::size_t LayerSpec::units() const {
  return is_conv() ? conv().out_channels : std::get<DenseShape>(shape).out;
}

std::size_t LayerSpec::positions() const { return is_conv() ? conv().positions() : 1; }

std::size_t LayerSpec::input_width() const {
  if (!is_conv()) return std::get<DenseShape>(shape).in;
  const auto& c = conv();
  return c.in_channels * c.in_height * c.in_width;
}

std::size_t LayerSpec::output_width() const { return units() * positions(); }

std::size_t LayerSpec::param_count() const {
  std::size_t n = weight_count() + units();
  if (weight_norm == WeightNorm::normalize) n += units();
  if (batch_norm) n += 2 * units();
  return n;
}

LayerSpec dense(std::size_t in, std::size_t out, Activation act) {
  LayerSpec s;
  s.shape = DenseShape{in, out};
  s.activation = act;
  return s;
}

LayerSpec conv2d(const ConvShape& shape, Activation act) {
  LayerSpec s;
  s.shape = shape;
  s.activation = act;
  return s;
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid_output: return "sigmoid_output";
  }
  return "?";
}

std::string_view to_string(WeightNorm w) {
  switch (w) {
    case WeightNorm::none: return "none";
    case WeightNorm::standardize: return "standardize";
    case WeightNorm::normalize: return "normalize";
  }
  return "?";
}

std::string_view to_string(Conditioning c) {
  switch (c) {
    case Conditioning::none: return "none";
    case Conditioning::equilibrate_static: return "equilibrate_static";
    case Conditioning::equilibrate_reparam: return "equilibrate_reparam";
  }
  return "?";
}

std::string_view to_string(EquilibrationAxis a) {
  return a == EquilibrationAxis::output_units ? "output_units" : "input_rows";
}

std::optional<Activation> parse_activation(std::string_view s) {
  for (auto a : {Activation::identity, Activation::relu, Activation::tanh,
                 Activation::sigmoid_output})
    if (to_string(a) == s) return a;
  return std::nullopt;
}

std::optional<WeightNorm> parse_weight_norm(std::string_view s) {
  for (auto w : {WeightNorm::none, WeightNorm::standardize, WeightNorm::normalize})
    if (to_string(w) == s) return w;
  return std::nullopt;
}

std::optional<Conditioning> parse_conditioning(std::string_view s) {
  for (auto c : {Conditioning::none, Conditioning::equilibrate_static,
                 Conditioning::equilibrate_reparam})
    if (to_string(c) == s) return c;
  return std::nullopt;
}

std::optional<EquilibrationAxis> parse_axis(std::string_view s) {
  for (auto a : {EquilibrationAxis::output_units, EquilibrationAxis::input_rows})
    if (to_string(a) == s) return a;
  return std::nullopt;
}

std::string describe(const LayerSpec& spec) {
  std::ostringstream os;
  if (spec.is_conv()) {
    const auto& c = spec.conv();
    os << "conv2d " << c.in_channels << ' ' << c.out_channels << ' ' << c.kernel << ' '
       << c.stride << ' ' << c.padding << ' ' << c.in_height << ' ' << c.in_width;
  } else {
    const auto& d = std::get<DenseShape>(spec.shape);
    os << "dense " << d.in << ' ' << d.out;
  }
  os << ' ' << to_string(spec.activation) << " bn=" << (spec.batch_norm ? 1 : 0)
     << " wn=" << to_string(spec.weight_norm) << " cond=" << to_string(spec.conditioning)
     << " axis=" << to_string(spec.axis);
  return os.str();
}

namespace {

std::string_view value_after(std::string_view tok, std::string_view key) {
  if (tok.substr(0, key.size()) != key) {
    throw InvalidArgument("parse_layer: expected '" + std::string(key) + "...', got '" +
                          std::string(tok) + "'");
  }
  return tok.substr(key.size());
}

template <class T>
T require(std::optional<T> v, std::string_view what, std::string_view tok) {
  if (!v) throw InvalidArgument("parse_layer: unknown " + std::string(what) + " '" +
                                std::string(tok) + "'");
  return *v;
}

}  // namespace

LayerSpec parse_layer(std::string_view line) {
  std::istringstream is{std::string(line)};
  std::string kind;
  is >> kind;
  LayerSpec spec;
  if (kind == "dense") {
    DenseShape d;
    if (!(is >> d.in >> d.out)) throw InvalidArgument("parse_layer: bad dense dims");
    spec.shape = d;
  } else if (kind == "conv2d") {
    ConvShape c;
    if (!(is >> c.in_channels >> c.out_channels >> c.kernel >> c.stride >> c.padding >>
          c.in_height >> c.in_width)) {
      throw InvalidArgument("parse_layer: bad conv2d dims");
    }
    spec.shape = c;
  } else {
    throw InvalidArgument("parse_layer: unknown layer kind '" + kind + "'");
  }
  std::string act, bn, wn, cond, axis;
  if (!(is >> act >> bn >> wn >> cond >> axis)) throw InvalidArgument("parse_layer: truncated");
  spec.activation = require(parse_activation(act), "activation", act);
  const auto bnv = value_after(bn, "bn=");
  if (bnv != "0" && bnv != "1") throw InvalidArgument("parse_layer: bn must be 0 or 1");
  spec.batch_norm = bnv == "1";
  const auto wnv = value_after(wn, "wn=");
  spec.weight_norm = require(parse_weight_norm(wnv), "weight norm", wnv);
  const auto cv = value_after(cond, "cond=");
  spec.conditioning = require(parse_conditioning(cv), "conditioning", cv);
  const auto av = value_after(axis, "axis=");
  spec.axis = require(parse_axis(av), "axis", av);
  return spec;
}

}  // namespace wcond::net
