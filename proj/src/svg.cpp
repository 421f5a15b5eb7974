#include "gandiv/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "gandiv/error.hpp"

namespace gandiv {

namespace {

constexpr double kMarginLeft = 78.0;
constexpr double kMarginRight = 24.0;
constexpr double kMarginTop = 46.0;
constexpr double kMarginBottom = 58.0;
constexpr double kBarWidth = 44.0;
constexpr double kBarGap = 26.0;
constexpr double kPlotHeight = 240.0;

struct Column {
    const char* name;
    std::size_t index;
};

constexpr Column kNumericColumns[] = {
    {"batch_size", 1},   {"msssim_delta", 4}, {"fid", 5},         {"accuracy", 6},
    {"precision", 7},    {"recall", 8},       {"specificity", 9},
};

const Column* find_column(const std::string& name) {
    for (const auto& col : kNumericColumns)
        if (name == col.name) return &col;
    return nullptr;
}

std::string escape_xml(const std::string& text) {
    std::string out;
    for (char ch : text) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += ch;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

bool is_numeric_report_column(const std::string& name) { return find_column(name) != nullptr; }

std::string emit_svg_bars(const ReportTable& table, const std::string& metric) {
    if (table.rows.empty()) throw std::invalid_argument("svg: table has no rows");
    const Column* col = find_column(metric);
    if (!col)
        throw std::invalid_argument("svg: unknown metric column \"" + metric +
                                    "\" (numeric columns only)");

    std::vector<double> values;
    values.reserve(table.rows.size());
    for (const auto& row : table.rows) values.push_back(std::stod(row[col->index]));

    double vmin = 0.0;
    double vmax = 0.0;
    for (double v : values) {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    if (vmax == vmin) vmax = vmin + 1.0;  // all-zero table still renders
    const double scale = kPlotHeight / (vmax - vmin);
    const double baseline_y = kMarginTop + vmax * scale;

    const std::size_t n = values.size();
    const double plot_width = n * kBarWidth + (n - 1) * kBarGap;
    const double width = kMarginLeft + plot_width + kMarginRight;
    const double height = kMarginTop + kPlotHeight + kMarginBottom;

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(width) +
           "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) +
           "\">\n";
    svg += "  <title>" + escape_xml(metric) + " by variant</title>\n";
    svg += "  <text x=\"" + num(kMarginLeft) + "\" y=\"24.00\" font-size=\"15\">" +
           escape_xml(metric) + "</text>\n";

    // y axis with min, zero and max ticks
    const double axis_x = kMarginLeft - 10.0;
    svg += "  <line x1=\"" + num(axis_x) + "\" y1=\"" + num(kMarginTop) + "\" x2=\"" +
           num(axis_x) + "\" y2=\"" + num(kMarginTop + kPlotHeight) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    auto y_tick = [&](double value) {
        const double y = kMarginTop + (vmax - value) * scale;
        svg += "  <line x1=\"" + num(axis_x - 4.0) + "\" y1=\"" + num(y) + "\" x2=\"" +
               num(axis_x) + "\" y2=\"" + num(y) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        svg += "  <text x=\"" + num(axis_x - 8.0) + "\" y=\"" + num(y + 4.0) +
               "\" font-size=\"11\" text-anchor=\"end\">" + num(value) + "</text>\n";
    };
    y_tick(vmax);
    if (vmin < 0.0 && vmax > 0.0) y_tick(0.0);
    y_tick(vmin);

    // x axis along the zero baseline
    svg += "  <line x1=\"" + num(axis_x) + "\" y1=\"" + num(baseline_y) + "\" x2=\"" +
           num(kMarginLeft + plot_width) + "\" y2=\"" + num(baseline_y) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";

    for (std::size_t i = 0; i < n; ++i) {
        const double v = values[i];
        const double x = kMarginLeft + i * (kBarWidth + kBarGap);
        const double bar_h = std::abs(v) * scale;
        const double bar_y = v >= 0.0 ? baseline_y - bar_h : baseline_y;
        svg += "  <rect x=\"" + num(x) + "\" y=\"" + num(bar_y) + "\" width=\"" + num(kBarWidth) +
               "\" height=\"" + num(bar_h) + "\" fill=\"#4878a8\"/>\n";
        const double value_y = v >= 0.0 ? bar_y - 5.0 : bar_y + bar_h + 13.0;
        svg += "  <text x=\"" + num(x + kBarWidth / 2.0) + "\" y=\"" + num(value_y) +
               "\" font-size=\"11\" text-anchor=\"middle\">" + escape_xml(table.rows[i][col->index]) +
               "</text>\n";
        svg += "  <text x=\"" + num(x + kBarWidth / 2.0) + "\" y=\"" +
               num(kMarginTop + kPlotHeight + 18.0) +
               "\" font-size=\"11\" text-anchor=\"middle\">" + escape_xml(table.rows[i][0]) +
               "</text>\n";
    }

    svg += "  <text x=\"" + num(kMarginLeft + plot_width / 2.0) + "\" y=\"" +
           num(height - 14.0) + "\" font-size=\"13\" text-anchor=\"middle\">variant</text>\n";
    svg += "</svg>\n";
    return svg;
}

void save_svg_bars(const std::string& path, const ReportTable& table, const std::string& metric) {
    const std::string svg = emit_svg_bars(table, metric);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output file: " + path);
    out.write(svg.data(), static_cast<std::streamsize>(svg.size()));
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace gandiv
