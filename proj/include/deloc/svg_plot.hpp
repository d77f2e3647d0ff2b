#pragma once

#include <string>
#include <vector>

namespace deloc {

struct Series {
  std::string label;
  std::vector<double> x, y;
  /// Optional symmetric error bars (same length as y).
  std::vector<double> err;
  bool dashed = false;
};

struct Chart {
  std::string title, x_label, y_label;
  bool log_x = false, log_y = false;
  std::vector<Series> series;
};

/// Self-contained SVG line chart. Non-finite points (and non-positive ones on
/// log axes) are skipped.
std::string render_svg(const Chart& chart);

}  // namespace deloc
