#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wcond/net/dataset.hpp"

namespace wcond::net {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// Unsigned-byte IDX tensor: big-endian magic, big-endian u32 dims, then
/// row-major payload.
struct IdxArray {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;
};

IdxArray read_idx(std::istream& in);
IdxArray read_idx_file(const std::string& path);
void write_idx(std::ostream& out, const IdxArray& a);

/// Images scaled to [0, 1] as N x (rows*cols); target 1 where label ==
/// positive_label, else 0. At most max_samples rows (0 = all).
Dataset idx_binary_dataset(const IdxArray& images, const IdxArray& labels,
                           std::uint8_t positive_label, std::size_t max_samples = 0);

}  // namespace wcond::net
