#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "epicast/app/plot.hpp"
#include "epicast/app/report.hpp"
#include "epicast/arima.hpp"
#include "epicast/series.hpp"

namespace epicast::app {

inline constexpr std::string_view kToolkitVersion = "1.0.0";

/// Models accepted in ExperimentConfig::models.
[[nodiscard]] const std::vector<std::string>& known_models();

/**
 * @brief Benchmark grid and run settings. Defaults: four countries, windows 3/6/10/15,
 * horizons 1/3/5, 100 initializations, ARIMA(1, 2, 2) on 15-day windows.
 *
 * JSON config files use the field names below as keys; arima_orders is a
 * [p, d, q] array and cutoff_date is YYYY-MM-DD.
 */
struct ExperimentConfig {
    std::filesystem::path data_path;
    std::vector<std::string> countries{"US", "Italy", "Spain", "Germany"};
    std::optional<Date> cutoff_date = Date{std::chrono::year{2020}, std::chrono::May,
                                           std::chrono::day{25}};
    double threshold = 100.0;
    std::vector<std::string> models{"vanilla", "stacked", "bidirectional",
                                    "cnn_lstm", "conv_lstm", "arima"};
    std::vector<std::size_t> seq_lengths{3, 6, 10, 15};
    /// Window lengths used for ARIMA cells.
    std::vector<std::size_t> arima_seq_lengths{15};
    std::vector<std::size_t> horizons{1, 3, 5};
    std::size_t n_inits = 100;
    std::uint64_t base_seed = 0;
    arima::ArimaOrders arima_orders{1, 2, 2};
    /// Select ARIMA orders per cell by grid search on the validation windows.
    bool arima_grid_search = false;
    std::size_t epochs = 200;
    double learning_rate = 0.1;
    std::size_t threads = 1;
    std::filesystem::path output_dir = "results";
    ReportFormat report_format = ReportFormat::Csv;
    bool emit_plots = false;

    /// Throws Error(InvalidArgument) on an unusable grid.
    void validate() const;
};

/// Parses a JSON document; absent keys keep their defaults, unknown keys are rejected.
[[nodiscard]] ExperimentConfig parse_experiment_config(std::string_view json_text);
[[nodiscard]] ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct BenchmarkOutput {
    MetricReport report;
    /// One chart per (country, horizon) when plots are requested.
    std::vector<std::pair<std::string, PlotInput>> plots;
};

using ProgressLog = std::function<void(std::string_view)>;

/**
 * @brief Runs every configured cell: ingest, truncate, window, split, fit, evaluate.
 *
 * Rows follow the configured grid order (model, country, n_s, n_p). A failing
 * cell is recorded in the metadata and the remaining cells still run.
 */
[[nodiscard]] BenchmarkOutput run_benchmark(const ExperimentConfig& config,
                                            const ProgressLog& log = {});

/// Writes report.<format> and any plots into config.output_dir.
void write_outputs(const ExperimentConfig& config, const BenchmarkOutput& output);

}  // namespace epicast::app
