#pragma once

#include <string>
#include <vector>

namespace klift {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  int width = 720;
  int height = 440;
};

/// Standalone SVG line chart. Non-finite points (and non-positive ones on a
/// log axis) break the polyline.
[[nodiscard]] std::string render_line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace klift
