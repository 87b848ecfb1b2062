#include "wcond/errors.hpp"

#include <sstream>

namespace wcond {

namespace {

std::string rank_message(double sigma_max, double sigma_min) {
  std::ostringstream os;
  os.precision(17);
  os << "matrix is numerically rank-deficient: sigma_max=" << sigma_max
     << " sigma_min=" << sigma_min;
  return os.str();
}

}  // namespace

RankDeficientError::RankDeficientError(double sigma_max, double sigma_min)
    : std::runtime_error(rank_message(sigma_max, sigma_min)),
      sigma_max_(sigma_max),
      sigma_min_(sigma_min) {}

ZeroRowError::ZeroRowError(const std::string& what_stage, std::size_t index)
    : std::runtime_error(what_stage + ": zero-norm vector at index " + std::to_string(index)),
      index_(index) {}

NonFiniteError::NonFiniteError(const std::string& where, std::size_t index)
    : std::runtime_error(where + ": non-finite value at index " + std::to_string(index)),
      index_(index) {}

}  // namespace wcond
