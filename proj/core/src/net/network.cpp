#include "wcond/net/network.hpp"

#include <cmath>

#include "wcond/net/conv.hpp"
#include "wcond/rng.hpp"

namespace wcond::net {

namespace {

void validate(const std::vector<LayerSpec>& specs) {
  if (specs.empty()) throw InvalidArgument("Network: no layers");
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const auto& s = specs[k];
    if (s.fan_in() == 0 || s.units() == 0) {
      throw InvalidArgument("Network: layer " + std::to_string(k) + " has a zero dimension");
    }
    if (s.is_conv()) {
      const auto& c = s.conv();
      if (c.stride == 0 || c.kernel == 0 || c.in_height + 2 * c.padding < c.kernel ||
          c.in_width + 2 * c.padding < c.kernel) {
        throw InvalidArgument("Network: conv layer " + std::to_string(k) + " has bad geometry");
      }
    }
    if (k > 0 && specs[k - 1].output_width() != s.input_width()) {
      throw InvalidArgument("Network: layer " + std::to_string(k) + " input width " +
                            std::to_string(s.input_width()) + " != previous output width " +
                            std::to_string(specs[k - 1].output_width()));
    }
    const bool last = k + 1 == specs.size();
    if (last && s.activation != Activation::identity &&
        s.activation != Activation::sigmoid_output) {
      throw InvalidArgument("Network: last layer must be identity or sigmoid_output");
    }
    if (!last && s.activation == Activation::sigmoid_output) {
      throw InvalidArgument("Network: sigmoid_output is only valid on the last layer");
    }
  }
}

Matrix unit_columns_of(const Matrix& u, std::optional<RowUnitCache>& cache) {
  cache = unit_rows(transpose(u), kEquilibrationFloor);
  return transpose(cache->out);
}

void check_finite(const Matrix& m, std::size_t layer) {
  const auto d = m.data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d[i])) throw NonFiniteError("forward layer " + std::to_string(layer), i);
  }
}

void apply_activation(Matrix& z, Activation a) {
  switch (a) {
    case Activation::relu:
      for (double& v : z.data()) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::tanh:
      for (double& v : z.data()) v = std::tanh(v);
      break;
    case Activation::identity:
    case Activation::sigmoid_output:  // logits; sigmoid lives in the loss
      break;
  }
}

Matrix activation_backward(const Matrix& d_out, const LayerCache& c, Activation a) {
  Matrix d = d_out;
  auto dd = d.data();
  switch (a) {
    case Activation::relu: {
      const auto pre = c.act_in.data();
      for (std::size_t i = 0; i < dd.size(); ++i)
        if (!(pre[i] > 0.0)) dd[i] = 0.0;
      break;
    }
    case Activation::tanh: {
      const auto y = c.act_out.data();
      for (std::size_t i = 0; i < dd.size(); ++i) dd[i] *= 1.0 - y[i] * y[i];
      break;
    }
    case Activation::identity:
    case Activation::sigmoid_output:
      break;
  }
  return d;
}

}  // namespace

Network::Network(std::vector<LayerSpec> specs, std::uint64_t seed)
    : specs_(std::move(specs)), seed_(seed) {
  validate(specs_);
  std::size_t total = 0;
  for (const auto& s : specs_) {
    offsets_.push_back(total);
    total += s.param_count();
  }
  params_.assign(total, 0.0);
  bn_.resize(specs_.size());

  for (std::size_t k = 0; k < specs_.size(); ++k) {
    const auto& s = specs_[k];
    Rng rng(derive_seed(seed, k));
    const double fan_out =
        static_cast<double>(s.is_conv() ? s.units() * s.conv().kernel * s.conv().kernel
                                        : s.units());
    const double limit = std::sqrt(6.0 / (static_cast<double>(s.fan_in()) + fan_out));
    auto p = layer_params(k);
    for (double& w : p.weight) w = rng.uniform(-limit, limit);
    if (!p.gain.empty()) {
      const auto norms = row_norms2(raw_units(k));
      std::copy(norms.begin(), norms.end(), p.gain.begin());
    }
    for (double& g : p.gamma) g = 1.0;
    if (s.batch_norm) {
      bn_[k].running_mean.assign(s.units(), 0.0);
      bn_[k].running_var.assign(s.units(), 1.0);
    }
  }
}

void Network::set_params(std::span<const double> theta) {
  if (theta.size() != params_.size()) {
    throw InvalidArgument("Network::set_params: expected " + std::to_string(params_.size()) +
                          " values, got " + std::to_string(theta.size()));
  }
  std::copy(theta.begin(), theta.end(), params_.begin());
}

LayerParams Network::layer_params(std::size_t k) {
  const auto& s = specs_.at(k);
  std::span<double> all(params_);
  std::size_t off = offsets_[k];
  LayerParams p;
  p.weight = all.subspan(off, s.weight_count());
  off += s.weight_count();
  p.bias = all.subspan(off, s.units());
  off += s.units();
  if (s.weight_norm == WeightNorm::normalize) {
    p.gain = all.subspan(off, s.units());
    off += s.units();
  }
  if (s.batch_norm) {
    p.gamma = all.subspan(off, s.units());
    off += s.units();
    p.beta = all.subspan(off, s.units());
  }
  return p;
}

ConstLayerParams Network::layer_params(std::size_t k) const {
  auto p = const_cast<Network*>(this)->layer_params(k);
  return {p.weight, p.bias, p.gain, p.gamma, p.beta};
}

Matrix Network::raw_units(std::size_t k) const {
  const auto& s = specs_.at(k);
  const auto w = layer_params(k).weight;
  std::vector<double> data(w.begin(), w.end());
  if (s.is_conv()) return Matrix(s.units(), s.fan_in(), std::move(data));
  return transpose(Matrix(s.fan_in(), s.units(), std::move(data)));
}

Matrix Network::weight(std::size_t k) const { return transpose(raw_units(k)); }

void Network::set_weight(std::size_t k, const Matrix& w) {
  const auto& s = specs_.at(k);
  if (w.rows() != s.fan_in() || w.cols() != s.units()) {
    throw InvalidArgument("Network::set_weight: shape mismatch for layer " + std::to_string(k));
  }
  const Matrix stored = s.is_conv() ? transpose(w) : w;
  const auto d = stored.data();
  std::copy(d.begin(), d.end(), layer_params(k).weight.begin());
}

Matrix Network::effective_units(std::size_t k, LayerCache* cache,
                                std::vector<std::string>* log) const {
  const auto& s = specs_[k];
  const auto p = layer_params(k);
  Matrix u = raw_units(k);
  LayerCache scratch{u, u, {}, {}, {}, u, {}, u, u};
  LayerCache& c = cache ? *cache : scratch;

  if (s.weight_norm == WeightNorm::standardize) {
    c.standardize = standardize_rows(u);
    u = c.standardize->out;
  } else if (s.weight_norm == WeightNorm::normalize) {
    c.gain_norm = gain_normalize_rows(u, p.gain);
    u = c.gain_norm->out;
  }
  if (s.conditioning == Conditioning::equilibrate_reparam) {
    if (s.axis == EquilibrationAxis::output_units) {
      c.equilibrate = unit_rows(u, kEquilibrationFloor);
      u = c.equilibrate->out;
    } else {
      u = unit_columns_of(u, c.equilibrate);
    }
    if (log) {
      for (std::size_t i = 0; i < c.equilibrate->floored.size(); ++i) {
        if (c.equilibrate->floored[i]) {
          log->push_back("layer " + std::to_string(k) + " vector " + std::to_string(i) +
                         " norm below 1e-12, floored");
        }
      }
    }
  }
  return u;
}

Matrix Network::effective_weight(std::size_t k) const {
  return transpose(effective_units(k, nullptr, nullptr));
}

ForwardResult Network::forward(const Matrix& x, Phase phase) const {
  if (x.cols() != input_width()) {
    throw InvalidArgument("Network::forward: input width " + std::to_string(x.cols()) +
                          " != " + std::to_string(input_width()));
  }
  ForwardResult fr{x, {}, phase, {}};
  fr.layers.reserve(specs_.size());
  const std::size_t batch = x.rows();
  Matrix h = x;
  for (std::size_t k = 0; k < specs_.size(); ++k) {
    const auto& s = specs_[k];
    const auto p = layer_params(k);
    LayerCache c{h, h, {}, {}, {}, h, {}, h, h};
    if (s.is_conv()) c.patches = im2col(h, s.conv());
    c.u_eff = effective_units(k, &c, &fr.floor_log);

    // Z = patches * U_eff^T + b
    Matrix z = matmul(c.patches, transpose(c.u_eff));
    for (std::size_t i = 0; i < z.rows(); ++i) {
      auto r = z.row(i);
      for (std::size_t u = 0; u < r.size(); ++u) r[u] += p.bias[u];
    }
    if (s.batch_norm) {
      auto [y, bc] = batch_norm(z, p.gamma, p.beta, bn_[k], phase);
      z = std::move(y);
      c.bn = std::move(bc);
    }
    c.act_in = z;
    apply_activation(z, s.activation);
    check_finite(z, k);
    c.act_out = z;
    h = s.is_conv() ? positions_to_channels(z, batch, s.positions()) : std::move(z);
    fr.layers.push_back(std::move(c));
  }
  fr.output = std::move(h);
  return fr;
}

Vector Network::backward(const ForwardResult& fr, const Matrix& d_output) const {
  if (fr.layers.size() != specs_.size()) throw InvalidArgument("backward: cache mismatch");
  if (d_output.rows() != fr.output.rows() || d_output.cols() != fr.output.cols()) {
    throw InvalidArgument("backward: d_output shape mismatch");
  }
  Vector grad(params_.size(), 0.0);
  std::span<double> gall(grad);
  const std::size_t batch = d_output.rows();
  Matrix dh = d_output;

  for (std::size_t kk = specs_.size(); kk-- > 0;) {
    const auto& s = specs_[kk];
    const auto& c = fr.layers[kk];
    const auto p = layer_params(kk);
    std::size_t off = offsets_[kk];

    Matrix dz = s.is_conv() ? channels_to_positions(dh, batch, s.positions()) : dh;
    dz = activation_backward(dz, c, s.activation);

    Vector dgamma, dbeta;
    if (s.batch_norm) {
      auto g = batch_norm_backward(*c.bn, p.gamma, dz);
      dz = std::move(g.dx);
      dgamma = std::move(g.dgamma);
      dbeta = std::move(g.dbeta);
    }

    Vector db(s.units(), 0.0);
    for (std::size_t i = 0; i < dz.rows(); ++i) {
      const auto r = dz.row(i);
      for (std::size_t u = 0; u < r.size(); ++u) db[u] += r[u];
    }
    Matrix du = matmul(transpose(dz), c.patches);  // units x fan_in

    if (kk > 0) {
      Matrix dpatches = matmul(dz, c.u_eff);
      dh = s.is_conv() ? col2im(dpatches, s.conv(), batch) : std::move(dpatches);
    }

    if (c.equilibrate) {
      if (s.axis == EquilibrationAxis::output_units) {
        du = unit_rows_backward(*c.equilibrate, du);
      } else {
        du = transpose(unit_rows_backward(*c.equilibrate, transpose(du)));
      }
    }
    Vector dgain;
    if (c.gain_norm) {
      auto [dv, dg] = gain_normalize_rows_backward(*c.gain_norm, du);
      du = std::move(dv);
      dgain = std::move(dg);
    } else if (c.standardize) {
      du = standardize_rows_backward(*c.standardize, du);
    }

    const Matrix dstore = s.is_conv() ? du : transpose(du);
    const auto dsd = dstore.data();
    std::copy(dsd.begin(), dsd.end(), gall.begin() + static_cast<std::ptrdiff_t>(off));
    off += s.weight_count();
    std::copy(db.begin(), db.end(), gall.begin() + static_cast<std::ptrdiff_t>(off));
    off += s.units();
    if (!dgain.empty()) {
      std::copy(dgain.begin(), dgain.end(), gall.begin() + static_cast<std::ptrdiff_t>(off));
      off += s.units();
    }
    if (s.batch_norm) {
      std::copy(dgamma.begin(), dgamma.end(), gall.begin() + static_cast<std::ptrdiff_t>(off));
      off += s.units();
      std::copy(dbeta.begin(), dbeta.end(), gall.begin() + static_cast<std::ptrdiff_t>(off));
    }
  }
  return grad;
}

Network Network::with_conditioning(Conditioning c) const {
  Network out = *this;
  for (auto& s : out.specs_) s.conditioning = c;
  return out;
}

Matrix equilibrated(const Matrix& w, EquilibrationAxis axis) {
  // w is n_in x n_out; output units are its columns.
  return axis == EquilibrationAxis::output_units
             ? transpose(unit_rows(transpose(w), kEquilibrationFloor).out)
             : unit_rows(w, kEquilibrationFloor).out;
}

Network condition_weights(const Network& net, std::vector<std::string>* log) {
  Network out = net.with_conditioning(Conditioning::equilibrate_static);
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    const auto& s = net.specs()[k];
    const Matrix w = net.weight(k);
    const bool by_units = s.axis == EquilibrationAxis::output_units;
    const auto c = unit_rows(by_units ? transpose(w) : w, kEquilibrationFloor);
    if (log) {
      for (std::size_t i = 0; i < c.floored.size(); ++i) {
        if (c.floored[i]) {
          log->push_back("layer " + std::to_string(k) + " vector " + std::to_string(i) +
                         " norm below 1e-12, floored");
        }
      }
    }
    out.set_weight(k, by_units ? transpose(c.out) : c.out);
  }
  return out;
}

}  // namespace wcond::net
