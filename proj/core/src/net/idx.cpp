#include "wcond/net/idx.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace wcond::net {

namespace {

std::uint32_t read_be32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw InvalidArgument("read_idx: truncated header");
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

void write_be32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b, 4);
}

}  // namespace

IdxArray read_idx(std::istream& in) {
  IdxArray a;
  a.magic = read_be32(in);
  if ((a.magic >> 16) != 0 || ((a.magic >> 8) & 0xff) != 0x08) {
    throw InvalidArgument("read_idx: unsupported magic (only unsigned-byte IDX is read)");
  }
  const std::uint32_t ndims = a.magic & 0xff;
  if (ndims == 0 || ndims > 4) throw InvalidArgument("read_idx: bad dimension count");
  std::uint64_t total = 1;
  for (std::uint32_t i = 0; i < ndims; ++i) {
    a.dims.push_back(read_be32(in));
    total *= a.dims.back();
  }
  if (total > (std::uint64_t{1} << 31)) throw InvalidArgument("read_idx: payload too large");
  a.data.resize(static_cast<std::size_t>(total));
  if (total && !in.read(reinterpret_cast<char*>(a.data.data()), static_cast<std::streamsize>(total))) {
    throw InvalidArgument("read_idx: truncated payload");
  }
  return a;
}

IdxArray read_idx_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("read_idx_file: cannot open " + path);
  return read_idx(in);
}

void write_idx(std::ostream& out, const IdxArray& a) {
  write_be32(out, a.magic);
  for (auto d : a.dims) write_be32(out, d);
  out.write(reinterpret_cast<const char*>(a.data.data()), static_cast<std::streamsize>(a.data.size()));
}

Dataset idx_binary_dataset(const IdxArray& images, const IdxArray& labels,
                           std::uint8_t positive_label, std::size_t max_samples) {
  if (images.magic != kIdxImagesMagic || images.dims.size() != 3) {
    throw InvalidArgument("idx_binary_dataset: images must have magic 0x00000803 and 3 dims");
  }
  if (labels.magic != kIdxLabelsMagic || labels.dims.size() != 1) {
    throw InvalidArgument("idx_binary_dataset: labels must have magic 0x00000801 and 1 dim");
  }
  if (images.dims[0] != labels.dims[0]) {
    throw InvalidArgument("idx_binary_dataset: image and label counts differ");
  }
  std::size_t n = images.dims[0];
  if (max_samples) n = std::min(n, max_samples);
  const std::size_t pixels = std::size_t{images.dims[1]} * images.dims[2];
  Matrix x(n, pixels);
  Matrix y(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = x.row(i);
    for (std::size_t p = 0; p < pixels; ++p) r[p] = images.data[i * pixels + p] / 255.0;
    y(i, 0) = labels.data[i] == positive_label ? 1.0 : 0.0;
  }
  return {std::move(x), std::move(y)};
}

}  // namespace wcond::net
