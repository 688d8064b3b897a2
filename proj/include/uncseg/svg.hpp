#pragma once

#include <string>
#include <utility>
#include <vector>

namespace uncseg {

// One polyline in a chart, in data coordinates.
struct SvgSeries {
  std::string label;
  std::string color;  // CSS color
  std::vector<std::pair<double, double>> points;
};

// Static line chart with axes, ticks, and a legend. Axis limits are padded
// from the data range unless all points coincide.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<SvgSeries>& series);

}  // namespace uncseg
