#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "epicast/forecast.hpp"

namespace epicast::app {

struct PlotSeries {
    std::string label;
    ForecastResult forecast;
};

/**
 * @brief Ground-truth tail plus forecasts that start at truth[forecast_offset].
 */
struct PlotInput {
    std::string title;
    std::vector<double> truth;
    /// Optional x-axis labels, one per truth point.
    std::vector<std::string> truth_labels;
    std::size_t forecast_offset = 0;
    std::vector<PlotSeries> models;
};

/// Static SVG line chart. Every polyline carries its values in a data-values attribute.
[[nodiscard]] std::string render_plot_svg(const PlotInput& input);

void emit_plot(const PlotInput& input, const std::filesystem::path& path);

}  // namespace epicast::app
