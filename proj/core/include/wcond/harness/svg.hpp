#pragma once

#include <string>
#include <vector>

namespace wcond::harness {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<Series> series;
  int width = 640;
  int height = 400;
};

/// SVG 1.1 multi-series line plot. Output bytes depend only on the input.
/// Non-finite points (and non-positive ones on a log axis) are skipped and
/// split the polyline. An empty plot still carries axes and a frame.
std::string emit_svg(const Plot& plot);

}  // namespace wcond::harness
