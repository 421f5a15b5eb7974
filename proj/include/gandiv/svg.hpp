#pragma once

#include <string>

#include "gandiv/experiment.hpp"

namespace gandiv {

// Columns emit_svg_bars accepts as its metric.
bool is_numeric_report_column(const std::string& name);

// Grouped bar chart over the table's rows for one numeric column: one bar
// per row, signed bars drawn from a zero baseline, heights linear in the
// value, labeled axes. Layout is fully deterministic and the output is
// well-formed XML (SVG 1.1).
std::string emit_svg_bars(const ReportTable& table, const std::string& metric);

void save_svg_bars(const std::string& path, const ReportTable& table, const std::string& metric);

}  // namespace gandiv
