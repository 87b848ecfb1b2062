#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wcond/matrix.hpp"
#include "wcond/net/layer.hpp"

namespace wcond::net {

/// Conv kernel as a 4-axis array [out][in][k][k], row-major. The same storage
/// read as out x (in*k*k) is the unrolled matrix.
struct Kernel4 {
  std::size_t out_channels = 0;
  std::size_t in_channels = 0;
  std::size_t kernel = 0;
  std::vector<double> data;

  double at(std::size_t o, std::size_t c, std::size_t i, std::size_t j) const {
    return data[((o * in_channels + c) * kernel + i) * kernel + j];
  }
  Matrix unrolled() const;
  static Kernel4 from_unrolled(const Matrix& m, std::size_t in_channels, std::size_t kernel);
};

/// Per-sample patches: row (n * P + p) holds the receptive field of output
/// position p of sample n, ordered (channel, ki, kj). Out-of-bounds taps are 0.
Matrix im2col(const Matrix& x, const ConvShape& s);

/// Adjoint of im2col: scatters patch gradients back to N x (C*H*W).
Matrix col2im(const Matrix& cols, const ConvShape& s, std::size_t batch);

/// (N*P) x units  ->  N x (units*P), channel-major per sample.
Matrix positions_to_channels(const Matrix& z, std::size_t batch, std::size_t positions);
Matrix channels_to_positions(const Matrix& y, std::size_t batch, std::size_t positions);

struct ConditionedKernel {
  Kernel4 kernel;
  std::vector<std::size_t> floored;  // filters whose norm hit the 1e-12 floor
};

/// Row-equilibrates the out x (in*k*k) unrolling: every filter gets unit 2-norm.
ConditionedKernel conv_condition(const Kernel4& kernel);

}  // namespace wcond::net
