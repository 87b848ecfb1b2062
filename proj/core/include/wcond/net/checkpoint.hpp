#pragma once

#include <iosfwd>

#include "wcond/net/network.hpp"

namespace wcond::net {

inline constexpr int kCheckpointVersion = 1;

/// Text checkpoint: version line, seed, one describe() line per layer, then
/// parameters and batch-norm running statistics in hexadecimal floating point
/// so the round trip is exact.
void write_checkpoint(std::ostream& out, const Network& net);
Network read_checkpoint(std::istream& in);

}  // namespace wcond::net
