#include "wcond/net/conv.hpp"

#include "wcond/net/normalization.hpp"

namespace wcond::net {

Matrix Kernel4::unrolled() const {
  return Matrix(out_channels, in_channels * kernel * kernel, data);
}

Kernel4 Kernel4::from_unrolled(const Matrix& m, std::size_t in_channels, std::size_t kernel) {
  if (m.cols() != in_channels * kernel * kernel) {
    throw InvalidArgument("Kernel4::from_unrolled: column count != in*k*k");
  }
  const auto d = m.data();
  return Kernel4{m.rows(), in_channels, kernel, std::vector<double>(d.begin(), d.end())};
}

Matrix im2col(const Matrix& x, const ConvShape& s) {
  const std::size_t h = s.in_height;
  const std::size_t w = s.in_width;
  if (x.cols() != s.in_channels * h * w) throw InvalidArgument("im2col: input width mismatch");
  const std::size_t oh = s.out_height();
  const std::size_t ow = s.out_width();
  const std::size_t k = s.kernel;
  const std::size_t p = oh * ow;
  Matrix cols(x.rows() * p, s.patch_size());
  for (std::size_t n = 0; n < x.rows(); ++n) {
    const auto img = x.row(n);
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        auto dst = cols.row(n * p + oy * ow + ox);
        std::size_t col = 0;
        for (std::size_t c = 0; c < s.in_channels; ++c) {
          for (std::size_t ki = 0; ki < k; ++ki) {
            const long iy = static_cast<long>(oy * s.stride + ki) - static_cast<long>(s.padding);
            for (std::size_t kj = 0; kj < k; ++kj, ++col) {
              const long ix =
                  static_cast<long>(ox * s.stride + kj) - static_cast<long>(s.padding);
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(w)) {
                continue;
              }
              dst[col] = img[(c * h + static_cast<std::size_t>(iy)) * w +
                             static_cast<std::size_t>(ix)];
            }
          }
        }
      }
    }
  }
  return cols;
}

Matrix col2im(const Matrix& cols, const ConvShape& s, std::size_t batch) {
  const std::size_t h = s.in_height;
  const std::size_t w = s.in_width;
  const std::size_t oh = s.out_height();
  const std::size_t ow = s.out_width();
  const std::size_t k = s.kernel;
  const std::size_t p = oh * ow;
  if (cols.rows() != batch * p || cols.cols() != s.patch_size()) {
    throw InvalidArgument("col2im: shape mismatch");
  }
  Matrix x(batch, s.in_channels * h * w);
  for (std::size_t n = 0; n < batch; ++n) {
    auto img = x.row(n);
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const auto src = cols.row(n * p + oy * ow + ox);
        std::size_t col = 0;
        for (std::size_t c = 0; c < s.in_channels; ++c) {
          for (std::size_t ki = 0; ki < k; ++ki) {
            const long iy = static_cast<long>(oy * s.stride + ki) - static_cast<long>(s.padding);
            for (std::size_t kj = 0; kj < k; ++kj, ++col) {
              const long ix =
                  static_cast<long>(ox * s.stride + kj) - static_cast<long>(s.padding);
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(w)) {
                continue;
              }
              img[(c * h + static_cast<std::size_t>(iy)) * w + static_cast<std::size_t>(ix)] +=
                  src[col];
            }
          }
        }
      }
    }
  }
  return x;
}

Matrix positions_to_channels(const Matrix& z, std::size_t batch, std::size_t positions) {
  const std::size_t units = z.cols();
  Matrix y(batch, units * positions);
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t p = 0; p < positions; ++p)
      for (std::size_t u = 0; u < units; ++u) y(n, u * positions + p) = z(n * positions + p, u);
  return y;
}

Matrix channels_to_positions(const Matrix& y, std::size_t batch, std::size_t positions) {
  const std::size_t units = y.cols() / positions;
  Matrix z(batch * positions, units);
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t p = 0; p < positions; ++p)
      for (std::size_t u = 0; u < units; ++u) z(n * positions + p, u) = y(n, u * positions + p);
  return z;
}

ConditionedKernel conv_condition(const Kernel4& kernel) {
  auto c = unit_rows(kernel.unrolled(), kEquilibrationFloor);
  ConditionedKernel out{Kernel4::from_unrolled(c.out, kernel.in_channels, kernel.kernel), {}};
  for (std::size_t i = 0; i < c.floored.size(); ++i)
    if (c.floored[i]) out.floored.push_back(i);
  return out;
}

}  // namespace wcond::net
