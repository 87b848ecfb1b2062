#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "wcond/net/loss.hpp"
#include "wcond/net/network.hpp"
#include "wcond/net/train.hpp"
#include "wcond/rng.hpp"

namespace wcond::testing {

using namespace wcond::net;

// Independent central-difference check of the full parameter gradient along
// random unit directions.
inline double fd_gradient_error(const Network& net, const Matrix& x, const Matrix& y, LossKind loss,
                                std::size_t directions, std::uint64_t seed) {
  const Vector g = loss_and_gradient(net, x, y, loss).grad;
  Rng rng(seed);
  const Vector theta(net.params().begin(), net.params().end());
  Network probe = net;
  auto value = [&](const Vector& t) {
    probe.set_params(t);
    return evaluate_loss(loss, probe.forward(x, Phase::train).output, y).value;
  };
  double worst = 0.0;
  // Fourth-order stencil: truncation is negligible at h = 1e-5, leaving only roundoff.
  const double h = 1e-5;
  for (std::size_t k = 0; k < directions; ++k) {
    Vector d(theta.size());
    for (auto& v : d) v = rng.normal();
    const double nd = norm2(d);
    double an = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      d[i] /= nd;
      an += g[i] * d[i];
    }
    auto at = [&](double s) {
      Vector t = theta;
      for (std::size_t i = 0; i < t.size(); ++i) t[i] += s * h * d[i];
      return value(t);
    };
    // A wide stencil can straddle a ReLU kink; the narrow second-order one rarely
    // does, so a direction passes if either agrees.
    const double fd4 = (8 * (at(1) - at(-1)) - (at(2) - at(-2))) / (12 * h);
    const double fd2 = (at(0.1) - at(-0.1)) / (0.2 * h);
    auto rel = [&](double fd) {
      return std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-7});
    };
    worst = std::max(worst, std::min(rel(fd4), rel(fd2)));
  }
  return worst;
}

struct Combo {
  bool conv;
  Activation act;
  Conditioning cond;
  EquilibrationAxis axis;
  bool bn;
  WeightNorm wn;
};

inline std::string name(const Combo& c) {
  std::ostringstream os;
  os << (c.conv ? "conv" : "dense") << '/' << to_string(c.act) << '/' << to_string(c.cond) << '/'
     << to_string(c.axis) << "/bn=" << c.bn << "/wn=" << to_string(c.wn);
  return os.str();
}

inline std::vector<LayerSpec> combo_arch(const Combo& c) {
  std::vector<LayerSpec> a;
  if (c.conv) {
    a.push_back(conv2d({1, 2, 3, 1, 1, 4, 4}, c.act));
    a.push_back(dense(32, 1));
  } else {
    a.push_back(dense(3, 4, c.act));
    a.push_back(dense(4, 2));
  }
  for (auto& s : a) {
    s.conditioning = c.cond;
    s.axis = c.axis;
    s.batch_norm = c.bn;
    s.weight_norm = c.wn;
  }
  return a;
}

}  // namespace wcond::testing
