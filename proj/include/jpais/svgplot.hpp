#ifndef JPAIS_SVGPLOT_HPP
#define JPAIS_SVGPLOT_HPP

#include <string>
#include <vector>

#include "jpais/metrics.hpp"

namespace jpais::plot {

enum class PlotKind { BerSnr, BerUsers, BerFdt, NtSnr, MiSnr, BerPe, Complexity };

PlotKind kind_from_name(const std::string& name);
std::vector<std::string> kind_names();

/// Renders one figure analog from experiment rows into a self-contained SVG
/// line chart (log BER axis with decade gridlines where applicable).
/// Throws std::runtime_error on an empty or unusable series set.
std::string render_svg(const std::vector<metrics::RunMetrics>& rows, PlotKind kind);

/// Reads the CSV at csv_path and writes <out_dir>/<kind>.svg.
std::string emit_plot(const std::string& csv_path, PlotKind kind, const std::string& out_dir);

}  // namespace jpais::plot

#endif
