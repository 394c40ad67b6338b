#pragma once

#include <string>
#include <vector>

namespace eigenmood {

// Deliberately minimal static charts: one fixed style, no options. Enough
// to inspect a run's numbers without a plotting stack.
namespace svg {

struct Series {
    std::vector<std::string> labels;  // per-point labels (bars, scatter)
    std::vector<double> x;
    std::vector<double> y;
};

void write_bar_chart(const std::string& path, const std::string& title, const Series& series);
void write_scatter(const std::string& path, const std::string& title, const Series& series,
                   const std::string& x_label, const std::string& y_label);
void write_heatmap(const std::string& path, const std::string& title,
                   const std::vector<std::string>& row_names,
                   const std::vector<std::string>& col_names,
                   const std::vector<double>& values);  // row-major
void write_line(const std::string& path, const std::string& title, const Series& series,
                const std::string& x_label, const std::string& y_label);

}  // namespace svg
}  // namespace eigenmood
