#include "epicast/app/plot.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "epicast/error.hpp"

namespace epicast::app {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 480.0;
constexpr double kMarginLeft = 90.0;
constexpr double kMarginRight = 200.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 60.0;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape_xml(const std::string& text) {
    std::string out;
    for (char ch : text) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(ch);
        }
    }
    return out;
}

struct Axes {
    double x_max;
    double y_min;
    double y_max;

    [[nodiscard]] double x(double index) const {
        const double span = std::max(x_max, 1.0);
        return kMarginLeft + index / span * (kWidth - kMarginLeft - kMarginRight);
    }
    [[nodiscard]] double y(double value) const {
        const double span = y_max > y_min ? y_max - y_min : 1.0;
        return kHeight - kMarginBottom - (value - y_min) / span * (kHeight - kMarginTop - kMarginBottom);
    }
};

}  // namespace

std::string render_plot_svg(const PlotInput& input) {
    if (input.models.empty()) {
        throw Error(ErrorKind::InvalidArgument, "a plot needs at least one model forecast");
    }
    if (input.truth.empty()) {
        throw Error(ErrorKind::InvalidArgument, "a plot needs ground-truth values");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::size_t last_index = input.truth.size() - 1;
    for (double v : input.truth) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (const auto& m : input.models) {
        for (double v : m.forecast.predictions) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!m.forecast.predictions.empty()) {
            last_index = std::max(last_index, input.forecast_offset + m.forecast.horizon() - 1);
        }
    }
    const double pad = (hi - lo) * 0.05;
    const Axes axes{static_cast<double>(last_index), lo - pad, hi + pad};

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
        "viewBox=\"0 0 {0} {1}\">\n",
        kWidth, kHeight);
    svg += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kWidth, kHeight);
    svg += fmt::format("<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">{}</text>\n",
                       kMarginLeft, escape_xml(input.title));
    // axes
    svg += fmt::format(
        "<line class=\"axis\" x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n",
        kMarginLeft, kHeight - kMarginBottom, kWidth - kMarginRight);
    svg += fmt::format(
        "<line class=\"axis\" x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n",
        kMarginLeft, kMarginTop, kHeight - kMarginBottom);
    for (int tick = 0; tick <= 4; ++tick) {
        const double value = axes.y_min + (axes.y_max - axes.y_min) * tick / 4.0;
        svg += fmt::format(
            "<text x=\"{}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\" "
            "text-anchor=\"end\">{:.0f}</text>\n",
            kMarginLeft - 6, axes.y(value) + 4, value);
    }
    if (!input.truth_labels.empty()) {
        const std::size_t step = std::max<std::size_t>(1, input.truth_labels.size() / 6);
        for (std::size_t i = 0; i < input.truth_labels.size(); i += step) {
            svg += fmt::format(
                "<text x=\"{:.2f}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" "
                "text-anchor=\"middle\">{}</text>\n",
                axes.x(static_cast<double>(i)), kHeight - kMarginBottom + 18,
                escape_xml(input.truth_labels[i]));
        }
    }

    const auto polyline = [&](const std::string& css_class, const std::string& label,
                              const char* colour, std::size_t offset,
                              const std::vector<double>& values, bool dashed) {
        std::string points;
        for (std::size_t i = 0; i < values.size(); ++i) {
            points += fmt::format("{}{:.2f},{:.2f}", i ? " " : "",
                                  axes.x(static_cast<double>(offset + i)), axes.y(values[i]));
        }
        return fmt::format(
            "<polyline class=\"{}\" data-label=\"{}\" data-offset=\"{}\" data-values=\"{}\" "
            "points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{}/>\n",
            css_class, escape_xml(label), offset, fmt::join(values, ","), points, colour,
            dashed ? " stroke-dasharray=\"6,3\"" : "");
    };

    svg += polyline("truth", "ground truth", "black", 0, input.truth, false);
    for (std::size_t m = 0; m < input.models.size(); ++m) {
        const auto& model = input.models[m];
        svg += polyline("forecast", model.label, kPalette[m % kPalette.size()],
                        input.forecast_offset, model.forecast.predictions, true);
    }

    // legend
    const double legend_x = kWidth - kMarginRight + 16;
    const auto legend_entry = [&](std::size_t row, const char* colour, const std::string& label) {
        const double y = kMarginTop + 10 + 20.0 * static_cast<double>(row);
        return fmt::format(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>"
            "<text class=\"legend\" x=\"{4}\" y=\"{5}\" font-family=\"sans-serif\" "
            "font-size=\"12\">{6}</text>\n",
            legend_x, y, legend_x + 24, colour, legend_x + 30, y + 4, escape_xml(label));
    };
    svg += legend_entry(0, "black", "ground truth");
    for (std::size_t m = 0; m < input.models.size(); ++m) {
        svg += legend_entry(m + 1, kPalette[m % kPalette.size()], input.models[m].label);
    }
    svg += "</svg>\n";
    return svg;
}

void emit_plot(const PlotInput& input, const std::filesystem::path& path) {
    const auto svg = render_plot_svg(input);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorKind::IoFailure, "cannot open '" + path.string() + "' for writing");
    }
    out << svg;
    if (!out.flush()) {
        throw Error(ErrorKind::IoFailure, "failed writing '" + path.string() + "'");
    }
}

}  // namespace epicast::app
