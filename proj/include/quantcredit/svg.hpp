#pragma once

#include <limits>
#include <string>
#include <vector>

namespace quantcredit {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
};

/// Minimal SVG line chart: frame, ticks, one polyline per series and a legend.
/// y values above `y_ceiling` (including +inf) are drawn at the ceiling.
std::string render_line_chart(const std::string& title, const std::string& xlabel,
                              const std::string& ylabel, const std::vector<Series>& series,
                              double y_ceiling = std::numeric_limits<double>::infinity());

}  // namespace quantcredit
