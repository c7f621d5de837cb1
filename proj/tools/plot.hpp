#pragma once

#include <string>
#include <vector>

namespace edgephase::cli {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Writes a standalone SVG line chart.
void write_line_chart(const std::string& path, const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<Series>& series, bool log_y = false);

}  // namespace edgephase::cli
