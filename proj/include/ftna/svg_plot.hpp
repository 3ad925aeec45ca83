// Minimal SVG line plot writer for the analysis output.
#pragma once

#include <string>
#include <utility>
#include <vector>

namespace ftna {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series);

}  // namespace ftna
