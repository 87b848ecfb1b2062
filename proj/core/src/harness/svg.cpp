#include "wcond/harness/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace wcond::harness {

namespace {

constexpr int kLeft = 72, kRight = 160, kTop = 40, kBottom = 52;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string fixed2(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool empty() const { return !(lo <= hi); }
};

// Widens empty or degenerate ranges so every point maps inside the frame.
void settle(Range& r, double default_lo, double default_hi, double pad) {
  if (r.empty()) {
    r.lo = default_lo;
    r.hi = default_hi;
  } else if (r.lo == r.hi) {
    const double d = r.lo == 0.0 ? pad : std::abs(r.lo) * 0.1;
    r.lo -= d;
    r.hi += d;
  }
}

}  // namespace

std::string emit_svg(const Plot& plot) {
  const int w = plot.width, h = plot.height;
  const double pw = w - kLeft - kRight, ph = h - kTop - kBottom;

  auto valid = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!plot.log_y || y > 0.0);
  };
  auto ty = [&](double y) { return plot.log_y ? std::log10(y) : y; };

  Range xr, yr;
  for (const auto& s : plot.series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!valid(s.x[i], s.y[i])) continue;
      xr.add(s.x[i]);
      yr.add(ty(s.y[i]));
    }
  }
  settle(xr, 0.0, 1.0, 0.5);
  settle(yr, 0.0, 1.0, 0.5);

  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + ph - (ty(y) - yr.lo) / (yr.hi - yr.lo) * ph; };
  auto py_t = [&](double t) { return kTop + ph - (t - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::string o;
  o += "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + std::to_string(w) +
       "\" height=\"" + std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " +
       std::to_string(h) + "\">\n";
  o += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(w) + "\" height=\"" + std::to_string(h) +
       "\" fill=\"white\"/>\n";
  o += "<text x=\"" + fixed2(kLeft + pw / 2) +
       "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
       xml_escape(plot.title) + "</text>\n";

  // Frame and ticks.
  o += "<rect x=\"" + fixed2(kLeft) + "\" y=\"" + fixed2(kTop) + "\" width=\"" + fixed2(pw) +
       "\" height=\"" + fixed2(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  o += "<g font-family=\"sans-serif\" font-size=\"10\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    const double X = px(x);
    o += "<line x1=\"" + fixed2(X) + "\" y1=\"" + fixed2(kTop + ph) + "\" x2=\"" + fixed2(X) +
         "\" y2=\"" + fixed2(kTop + ph + 4) + "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + fixed2(X) + "\" y=\"" + fixed2(kTop + ph + 16) +
         "\" text-anchor=\"middle\">" + tick_label(x) + "</text>\n";
  }
  std::vector<double> yticks;
  if (plot.log_y) {
    for (double d = std::ceil(yr.lo); d <= std::floor(yr.hi) && yticks.size() < 12; d += 1.0) {
      yticks.push_back(d);
    }
    if (yticks.size() < 2) yticks = {yr.lo, yr.hi};
  } else {
    for (int i = 0; i <= 4; ++i) yticks.push_back(yr.lo + (yr.hi - yr.lo) * i / 4.0);
  }
  for (double t : yticks) {
    const double Y = py_t(t);
    o += "<line x1=\"" + fixed2(kLeft - 4) + "\" y1=\"" + fixed2(Y) + "\" x2=\"" + fixed2(kLeft) +
         "\" y2=\"" + fixed2(Y) + "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + fixed2(kLeft - 6) + "\" y=\"" + fixed2(Y + 3) + "\" text-anchor=\"end\">" +
         tick_label(plot.log_y ? std::pow(10.0, t) : t) + "</text>\n";
  }
  o += "</g>\n";
  o += "<text x=\"" + fixed2(kLeft + pw / 2) + "\" y=\"" + fixed2(h - 12) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
       xml_escape(plot.x_label) + "</text>\n";
  o += "<text x=\"16\" y=\"" + fixed2(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       fixed2(kTop + ph / 2) + ")\" font-family=\"sans-serif\" font-size=\"12\">" +
       xml_escape(plot.y_label + (plot.log_y ? " (log)" : "")) + "</text>\n";

  // Series: polylines split at invalid points, plus a legend entry.
  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const std::string color = kPalette[k % std::size(kPalette)];
    const std::size_t n = std::min(s.x.size(), s.y.size());
    std::string pts;
    std::size_t count = 0;
    auto flush = [&] {
      if (count == 1) {
        o += "<circle cx=\"" + pts.substr(0, pts.find(',')) + "\" cy=\"" +
             pts.substr(pts.find(',') + 1) + "\" r=\"2\" fill=\"" + color + "\"/>\n";
      } else if (count > 1) {
        o += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"" +
             pts + "\"/>\n";
      }
      pts.clear();
      count = 0;
    };
    for (std::size_t i = 0; i < n; ++i) {
      if (!valid(s.x[i], s.y[i])) {
        flush();
        continue;
      }
      if (count) pts += ' ';
      pts += fixed2(px(s.x[i])) + "," + fixed2(py(s.y[i]));
      ++count;
    }
    flush();
    const double ly = kTop + 12 + 16.0 * static_cast<double>(k);
    o += "<line x1=\"" + fixed2(kLeft + pw + 10) + "\" y1=\"" + fixed2(ly) + "\" x2=\"" +
         fixed2(kLeft + pw + 30) + "\" y2=\"" + fixed2(ly) + "\" stroke=\"" + color +
         "\" stroke-width=\"2\"/>\n";
    o += "<text x=\"" + fixed2(kLeft + pw + 34) + "\" y=\"" + fixed2(ly + 4) +
         "\" font-family=\"sans-serif\" font-size=\"10\">" + xml_escape(s.name) + "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

}  // namespace wcond::harness
