#pragma once

// Minimal static SVG plots for the CLI's optional --svg output.

#include <string>
#include <vector>

namespace defectspec::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool scatter = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x_markers;  ///< vertical guide lines
};

std::string render_svg(const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace defectspec::cli
