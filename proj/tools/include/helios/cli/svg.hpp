#pragma once

#include <string>
#include <vector>

namespace helios::cli {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  ///< scatter points instead of a polyline
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  bool equal_aspect = false;
};

/// Static SVG document with axes, tick labels and a legend.
std::string render_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace helios::cli
