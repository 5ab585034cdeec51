#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace tacticrl {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

/// Step curves (one per series) on shared axes.
std::string step_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series);

/// Joint histogram of integer pairs drawn as a scatter; marker area grows
/// with the count. The diagonal marks equal values.
std::string joint_scatter_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                              const std::map<std::pair<std::size_t, std::size_t>, std::size_t>& counts);

}  // namespace tacticrl
