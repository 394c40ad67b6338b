#include "eigenmood/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "eigenmood/concepts.hpp"
#include "eigenmood/csv.hpp"

namespace eigenmood::svg {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 70.0;

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

std::ofstream open_svg(const std::string& path, const std::string& title) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
        << esc(title) << "</text>\n";
    return out;
}

struct Range {
    double lo, hi;
    double span() const { return hi > lo ? hi - lo : 1.0; }
};

Range padded_range(const std::vector<double>& v) {
    double lo = *std::min_element(v.begin(), v.end());
    double hi = *std::max_element(v.begin(), v.end());
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

double map_x(double v, const Range& r) {
    return kMarginLeft + (v - r.lo) / r.span() * (kWidth - kMarginLeft - kMarginRight);
}

double map_y(double v, const Range& r) {
    return kHeight - kMarginBottom - (v - r.lo) / r.span() * (kHeight - kMarginTop - kMarginBottom);
}

void axes(std::ofstream& out, const std::string& x_label, const std::string& y_label) {
    out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kHeight - kMarginBottom << "\" x2=\""
        << kWidth - kMarginRight << "\" y2=\"" << kHeight - kMarginBottom
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
        << "\" y2=\"" << kHeight - kMarginBottom << "\" stroke=\"black\"/>\n";
    if (!x_label.empty())
        out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10
            << "\" text-anchor=\"middle\">" << esc(x_label) << "</text>\n";
    if (!y_label.empty())
        out << "<text x=\"16\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
            << kHeight / 2 << ")\">" << esc(y_label) << "</text>\n";
}

}  // namespace

void write_bar_chart(const std::string& path, const std::string& title, const Series& series) {
    auto out = open_svg(path, title);
    axes(out, "", "");
    if (!series.y.empty()) {
        Range yr = padded_range(series.y);
        yr.lo = std::min(yr.lo, 0.0);
        const double plot_w = kWidth - kMarginLeft - kMarginRight;
        const double slot = plot_w / static_cast<double>(series.y.size());
        const double bar_w = 0.7 * slot;
        for (std::size_t i = 0; i < series.y.size(); ++i) {
            const double x = kMarginLeft + slot * (static_cast<double>(i) + 0.15);
            const double y0 = map_y(0.0, yr);
            const double y1 = map_y(series.y[i], yr);
            out << "<rect x=\"" << x << "\" y=\"" << std::min(y0, y1) << "\" width=\"" << bar_w
                << "\" height=\"" << std::fabs(y0 - y1) << "\" fill=\"#4878a8\"/>\n";
            const std::string label =
                i < series.labels.size() ? series.labels[i] : format_fixed(series.x[i], 2);
            out << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << kHeight - kMarginBottom + 14
                << "\" text-anchor=\"end\" transform=\"rotate(-35 " << x + bar_w / 2 << " "
                << kHeight - kMarginBottom + 14 << ")\">" << esc(label) << "</text>\n";
        }
        out << "<text x=\"" << kMarginLeft - 6 << "\" y=\"" << map_y(yr.hi, yr) + 4
            << "\" text-anchor=\"end\">" << format_fixed(yr.hi, 3) << "</text>\n";
    }
    out << "</svg>\n";
}

void write_scatter(const std::string& path, const std::string& title, const Series& series,
                   const std::string& x_label, const std::string& y_label) {
    auto out = open_svg(path, title);
    axes(out, x_label, y_label);
    if (!series.x.empty()) {
        const Range xr = padded_range(series.x);
        const Range yr = padded_range(series.y);
        for (std::size_t i = 0; i < series.x.size(); ++i) {
            const double px = map_x(series.x[i], xr);
            const double py = map_y(series.y[i], yr);
            out << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"4\" fill=\"#a83448\"/>\n";
            if (i < series.labels.size())
                out << "<text x=\"" << px + 6 << "\" y=\"" << py - 4 << "\">"
                    << esc(series.labels[i]) << "</text>\n";
        }
        out << "<text x=\"" << kMarginLeft << "\" y=\"" << kHeight - kMarginBottom + 14 << "\">"
            << format_fixed(xr.lo, 3) << "</text>\n";
        out << "<text x=\"" << kWidth - kMarginRight << "\" y=\"" << kHeight - kMarginBottom + 14
            << "\" text-anchor=\"end\">" << format_fixed(xr.hi, 3) << "</text>\n";
        out << "<text x=\"" << kMarginLeft - 6 << "\" y=\"" << map_y(yr.hi, yr) + 4
            << "\" text-anchor=\"end\">" << format_fixed(yr.hi, 3) << "</text>\n";
        out << "<text x=\"" << kMarginLeft - 6 << "\" y=\"" << map_y(yr.lo, yr) + 4
            << "\" text-anchor=\"end\">" << format_fixed(yr.lo, 3) << "</text>\n";
    }
    out << "</svg>\n";
}

void write_heatmap(const std::string& path, const std::string& title,
                   const std::vector<std::string>& row_names,
                   const std::vector<std::string>& col_names,
                   const std::vector<double>& values) {
    auto out = open_svg(path, title);
    if (!row_names.empty() && !col_names.empty()) {
        const double left = 110.0;
        const double top = kMarginTop + 10.0;
        const double cell_w = (kWidth - left - kMarginRight) / static_cast<double>(col_names.size());
        const double cell_h =
            std::min(28.0, (kHeight - top - kMarginBottom) / static_cast<double>(row_names.size()));
        const double vmax =
            std::max(1e-12, *std::max_element(values.begin(), values.end()));
        for (std::size_t r = 0; r < row_names.size(); ++r) {
            out << "<text x=\"" << left - 6 << "\" y=\"" << top + cell_h * (r + 0.65)
                << "\" text-anchor=\"end\">" << esc(row_names[r]) << "</text>\n";
            for (std::size_t c = 0; c < col_names.size(); ++c) {
                const double v = values[r * col_names.size() + c] / vmax;
                const int shade = static_cast<int>(std::lround(255.0 * (1.0 - v)));
                out << "<rect x=\"" << left + cell_w * c << "\" y=\"" << top + cell_h * r
                    << "\" width=\"" << cell_w - 1 << "\" height=\"" << cell_h - 1
                    << "\" fill=\"rgb(" << shade << "," << shade << ",255)\"/>\n";
            }
        }
        for (std::size_t c = 0; c < col_names.size(); ++c) {
            const double x = left + cell_w * (c + 0.5);
            const double y = top + cell_h * row_names.size() + 12;
            out << "<text x=\"" << x << "\" y=\"" << y << "\" text-anchor=\"end\" transform=\"rotate(-35 "
                << x << " " << y << ")\">" << esc(col_names[c]) << "</text>\n";
        }
    }
    out << "</svg>\n";
}

void write_line(const std::string& path, const std::string& title, const Series& series,
                const std::string& x_label, const std::string& y_label) {
    auto out = open_svg(path, title);
    axes(out, x_label, y_label);
    if (series.x.size() >= 2) {
        const Range xr = padded_range(series.x);
        const Range yr = padded_range(series.y);
        out << "<polyline fill=\"none\" stroke=\"#4878a8\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < series.x.size(); ++i)
            out << map_x(series.x[i], xr) << "," << map_y(series.y[i], yr) << " ";
        out << "\"/>\n";
    }
    out << "</svg>\n";
}

}  // namespace eigenmood::svg
