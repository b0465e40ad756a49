// epicast: run the forecasting benchmark grid over a JHU confirmed-cases CSV.
//
// Exit status: 0 when every cell ran, 1 when at least one cell failed,
// 2 on bad flags, an unreadable config or an output error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "epicast/app/experiment.hpp"
#include "epicast/error.hpp"

namespace {

constexpr int kExitCellFailures = 1;
constexpr int kExitUsage = 2;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Benchmark ARIMA and LSTM-family forecasters on cumulative case counts"};
    app.set_version_flag("--version", std::string(epicast::app::kToolkitVersion));

    std::string config_path;
    std::string data_path;
    std::vector<std::string> countries;
    std::vector<std::string> models;
    std::vector<std::size_t> seq_lengths;
    std::vector<std::size_t> arima_seq_lengths;
    std::vector<std::size_t> horizons;
    std::size_t inits = 0;
    std::uint64_t seed = 0;
    std::string cutoff;
    std::string format;
    std::string out_dir;
    bool plots = false;
    bool quiet = false;
    bool grid_search = false;
    std::size_t threads = 0;
    std::size_t epochs = 0;

    app.add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    app.add_option("--data", data_path, "JHU wide-format confirmed-cases CSV");
    app.add_option("--country", countries, "Country/Region to evaluate (repeatable)");
    app.add_option("--model", models,
                   "vanilla, stacked, bidirectional, cnn_lstm, conv_lstm or arima (repeatable)");
    app.add_option("--seq-len", seq_lengths, "Input window length for neural models (repeatable)");
    app.add_option("--arima-seq-len", arima_seq_lengths, "Input window length for ARIMA (repeatable)");
    app.add_option("--horizon", horizons, "Forecast horizon in days (repeatable)");
    app.add_option("--inits", inits, "Random initializations per neural cell")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Base seed");
    app.add_option("--cutoff", cutoff, "Last date to ingest, YYYY-MM-DD");
    app.add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--out", out_dir, "Output directory");
    app.add_flag("--plots", plots, "Write one SVG chart per country and horizon");
    app.add_option("--threads", threads, "Worker threads for multi-init training")
        ->check(CLI::PositiveNumber);
    app.add_option("--epochs", epochs, "Training epochs per initialization")->check(CLI::PositiveNumber);
    app.add_flag("--arima-grid-search", grid_search,
                 "Pick ARIMA orders per cell from the validation windows");
    app.add_flag("-q,--quiet", quiet, "Suppress progress output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    epicast::app::ExperimentConfig config;
    try {
        if (!config_path.empty()) config = epicast::app::load_experiment_config(config_path);
        if (app.count("--data")) config.data_path = data_path;
        if (app.count("--country")) config.countries = countries;
        if (app.count("--model")) config.models = models;
        if (app.count("--seq-len")) config.seq_lengths = seq_lengths;
        if (app.count("--arima-seq-len")) config.arima_seq_lengths = arima_seq_lengths;
        if (app.count("--horizon")) config.horizons = horizons;
        if (app.count("--inits")) config.n_inits = inits;
        if (app.count("--seed")) config.base_seed = seed;
        if (app.count("--cutoff")) config.cutoff_date = epicast::parse_iso_date(cutoff);
        if (app.count("--format")) config.report_format = *epicast::app::parse_report_format(format);
        if (app.count("--out")) config.output_dir = out_dir;
        if (plots) config.emit_plots = true;
        if (app.count("--threads")) config.threads = threads;
        if (app.count("--epochs")) config.epochs = epochs;
        if (grid_search) config.arima_grid_search = true;
        if (config.data_path.empty()) {
            throw epicast::Error(epicast::ErrorKind::InvalidArgument,
                                 "no data file given (use --data or data_path in the config)");
        }
        if (!std::filesystem::is_regular_file(config.data_path)) {
            throw epicast::Error(epicast::ErrorKind::IoFailure,
                                 "cannot read data file '" + config.data_path.string() + "'");
        }
        config.validate();
    } catch (const epicast::Error& e) {
        std::cerr << "epicast: " << e.what() << '\n';
        return kExitUsage;
    }

    epicast::app::ProgressLog log;
    if (!quiet) {
        log = [](std::string_view line) { std::cerr << line << '\n'; };
    }
    try {
        const auto output = epicast::app::run_benchmark(config, log);
        epicast::app::write_outputs(config, output);
        const auto& failures = output.report.metadata.failures;
        if (!quiet) {
            std::cerr << output.report.rows.size() << " rows written to "
                      << config.output_dir.string() << '\n';
        }
        if (!failures.empty()) {
            std::cerr << "epicast: " << failures.size() << " cell(s) failed\n";
            return kExitCellFailures;
        }
    } catch (const epicast::Error& e) {
        std::cerr << "epicast: " << e.what() << '\n';
        return kExitUsage;
    }
    return EXIT_SUCCESS;
}
