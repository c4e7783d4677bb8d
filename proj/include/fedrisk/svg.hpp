#pragma once

#include <span>
#include <string>
#include <vector>

namespace fedrisk {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

// Standalone SVG line chart: one polyline per series, axis ticks, legend.
// Output bytes are a pure function of the inputs.
void emit_svg_lines(std::span<const Series> series, const std::string& path, const std::string& x_label = "",
                    const std::string& y_label = "");

} // namespace fedrisk
