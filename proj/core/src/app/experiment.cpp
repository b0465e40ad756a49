#include "epicast/app/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "epicast/error.hpp"
#include "epicast/app/jhu_csv.hpp"
#include "epicast/forecast.hpp"
#include "epicast/neural/training.hpp"
#include "json.hpp"

namespace epicast::app {

namespace {

using nlohmann::json;

template <typename T>
std::vector<T> json_list(const json& value, const char* key) {
    if (!value.is_array()) {
        throw Error(ErrorKind::InvalidArgument, fmt::format("config '{}' must be an array", key));
    }
    return value.get<std::vector<T>>();
}

bool is_arima(const std::string& model) { return model == "arima"; }

struct CountryData {
    std::optional<TimeSeries> series;  // truncated
    std::string error;
};

std::vector<std::size_t> window_lengths_for(const ExperimentConfig& config,
                                            const std::string& model) {
    return is_arima(model) ? config.arima_seq_lengths : config.seq_lengths;
}

}  // namespace

const std::vector<std::string>& known_models() {
    static const std::vector<std::string> models{"vanilla",  "stacked",   "bidirectional",
                                                 "cnn_lstm", "conv_lstm", "arima"};
    return models;
}

void ExperimentConfig::validate() const {
    for (const auto& m : models) {
        if (std::find(known_models().begin(), known_models().end(), m) == known_models().end()) {
            throw Error(ErrorKind::InvalidArgument, "unknown model '" + m + "'");
        }
    }
    if (horizons.empty()) {
        throw Error(ErrorKind::InvalidArgument, "at least one horizon is required");
    }
    for (auto h : horizons) {
        if (h == 0) throw Error(ErrorKind::InvalidArgument, "horizons must be >= 1");
    }
    for (auto n : seq_lengths) {
        if (n == 0) throw Error(ErrorKind::InvalidArgument, "sequence lengths must be >= 1");
    }
    for (auto n : arima_seq_lengths) {
        if (n == 0) throw Error(ErrorKind::InvalidArgument, "sequence lengths must be >= 1");
    }
    if (n_inits == 0 || epochs == 0 || !(learning_rate > 0.0) || !(threshold > 0.0)) {
        throw Error(ErrorKind::InvalidArgument,
                    "n_inits, epochs, learning_rate and threshold must be positive");
    }
    arima_orders.validate();
}

ExperimentConfig parse_experiment_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw Error(ErrorKind::InvalidArgument, "config must be a JSON object");
    }
    ExperimentConfig config;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "data_path") {
                config.data_path = value.get<std::string>();
            } else if (key == "countries") {
                config.countries = json_list<std::string>(value, "countries");
            } else if (key == "cutoff_date") {
                config.cutoff_date = value.is_null()
                                         ? std::nullopt
                                         : std::optional(parse_iso_date(value.get<std::string>()));
            } else if (key == "threshold") {
                config.threshold = value.get<double>();
            } else if (key == "models") {
                config.models = json_list<std::string>(value, "models");
            } else if (key == "seq_lengths") {
                config.seq_lengths = json_list<std::size_t>(value, "seq_lengths");
            } else if (key == "arima_seq_lengths") {
                config.arima_seq_lengths = json_list<std::size_t>(value, "arima_seq_lengths");
            } else if (key == "horizons") {
                config.horizons = json_list<std::size_t>(value, "horizons");
            } else if (key == "n_inits") {
                config.n_inits = value.get<std::size_t>();
            } else if (key == "base_seed") {
                config.base_seed = value.get<std::uint64_t>();
            } else if (key == "arima_orders") {
                const auto orders = json_list<int>(value, "arima_orders");
                if (orders.size() != 3) {
                    throw Error(ErrorKind::InvalidArgument, "arima_orders must be [p, d, q]");
                }
                config.arima_orders = {orders[0], orders[1], orders[2]};
            } else if (key == "arima_grid_search") {
                config.arima_grid_search = value.get<bool>();
            } else if (key == "epochs") {
                config.epochs = value.get<std::size_t>();
            } else if (key == "learning_rate") {
                config.learning_rate = value.get<double>();
            } else if (key == "threads") {
                config.threads = value.get<std::size_t>();
            } else if (key == "output_dir") {
                config.output_dir = value.get<std::string>();
            } else if (key == "report_format") {
                const auto name = value.get<std::string>();
                const auto format = parse_report_format(name);
                if (!format) throw Error(ErrorKind::InvalidArgument, "unknown format '" + name + "'");
                config.report_format = *format;
            } else if (key == "emit_plots") {
                config.emit_plots = value.get<bool>();
            } else {
                throw Error(ErrorKind::InvalidArgument, "unknown config key '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("config: ") + e.what());
    }
    config.validate();
    return config;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::IoFailure, "cannot open config '" + path.string() + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_experiment_config(buffer.str());
}

BenchmarkOutput run_benchmark(const ExperimentConfig& config, const ProgressLog& log) {
    config.validate();
    const auto note = [&](const std::string& message) {
        if (log) log(message);
    };

    BenchmarkOutput output;
    auto& meta = output.report.metadata;
    meta.cutoff_date = config.cutoff_date ? format_iso_date(*config.cutoff_date) : "";
    meta.base_seed = config.base_seed;
    meta.n_inits = config.n_inits;
    meta.threshold = config.threshold;
    meta.toolkit_version = std::string(kToolkitVersion);
    if (config.models.empty()) {
        return output;
    }

    const std::size_t max_horizon = *std::max_element(config.horizons.begin(), config.horizons.end());
    std::size_t max_window = 0;
    for (const auto& m : config.models) {
        for (auto n : window_lengths_for(config, m)) max_window = std::max(max_window, n);
    }

    std::map<std::string, CountryData> countries;
    for (const auto& country : config.countries) {
        auto& data = countries[country];
        try {
            const auto raw = parse_jhu_csv(config.data_path, country, config.cutoff_date);
            data.series = truncate_below_threshold(raw, config.threshold);
        } catch (const Error& e) {
            data.error = e.what();
        }
    }

    // (country, horizon) -> plot, in first-seen order
    std::vector<std::pair<std::string, std::size_t>> plot_keys;
    std::vector<PlotInput> plots;
    const auto plot_for = [&](const std::string& country, std::size_t horizon) -> PlotInput& {
        const auto key = std::make_pair(country, horizon);
        const auto it = std::find(plot_keys.begin(), plot_keys.end(), key);
        if (it != plot_keys.end()) return plots[static_cast<std::size_t>(it - plot_keys.begin())];
        const auto& series = *countries.at(country).series;
        const std::size_t tail = std::min(series.size(), max_window + max_horizon);
        PlotInput plot;
        plot.title = fmt::format("{}: {}-day forecasts", country, horizon);
        const std::size_t first = series.size() - tail;
        plot.truth.assign(series.values().begin() + static_cast<std::ptrdiff_t>(first),
                          series.values().end());
        for (std::size_t i = first; i < series.size(); ++i) {
            const auto d = series.date_at(i);
            plot.truth_labels.push_back(fmt::format("{}/{}", static_cast<unsigned>(d.month()),
                                                    static_cast<unsigned>(d.day())));
        }
        plot.forecast_offset = tail - max_horizon;
        plot_keys.push_back(key);
        plots.push_back(std::move(plot));
        return plots.back();
    };

    for (const auto& model : config.models) {
        for (const auto& country : config.countries) {
            for (const auto n_s : window_lengths_for(config, model)) {
                const auto fail = [&](std::size_t n_p, const std::string& message) {
                    meta.failures.push_back({model, country, n_s, n_p, message});
                    note(fmt::format("FAILED {} {} n_s={} n_p={}: {}", model, country, n_s, n_p,
                                     message));
                };
                const auto& data = countries.at(country);
                if (!data.series) {
                    fail(0, data.error);
                    continue;
                }
                std::vector<std::unique_ptr<Forecaster>> per_horizon(config.horizons.size());
                SupervisedSplit split;
                try {
                    split = split_train_val_test(make_windows(*data.series, n_s, max_horizon));
                    if (is_arima(model)) {
                        auto orders = config.arima_orders;
                        if (config.arima_grid_search) {
                            const auto grid = arima::default_order_grid();
                            orders = arima::grid_search_orders(split.validation, n_s, grid);
                            note(fmt::format("{} {} n_s={}: selected ARIMA({}, {}, {})", model,
                                             country, n_s, orders.p, orders.d, orders.q));
                        }
                        for (auto& f : per_horizon) {
                            f = std::make_unique<arima::ArimaForecaster>(n_s, orders);
                        }
                    } else {
                        auto net = neural::NetworkConfig::for_architecture(
                            *neural::parse_architecture(model), n_s);
                        net.seed = config.base_seed;
                        net.epochs = config.epochs;
                        net.learning_rate = config.learning_rate;
                        auto trained = neural::multi_init_train(
                            net, split, {config.n_inits, config.threads}, config.horizons);
                        for (std::size_t h = 0; h < trained.size(); ++h) {
                            note(fmt::format("{} {} n_s={} n_p={}: best init {} (validation kMAPE {:.4g}%)",
                                             model, country, n_s, config.horizons[h],
                                             trained[h].seed_offset,
                                             trained[h].validation_kmape.percent));
                            per_horizon[h] =
                                std::make_unique<neural::NetworkForecaster>(std::move(trained[h].model));
                        }
                    }
                } catch (const Error& e) {
                    fail(0, e.what());
                    continue;
                }
                for (std::size_t h = 0; h < config.horizons.size(); ++h) {
                    const std::size_t n_p = config.horizons[h];
                    try {
                        const auto result = evaluate(*per_horizon[h], split.test, n_p);
                        output.report.rows.push_back({model, country, n_s, n_p,
                                                      result.kmape.percent, result.kmdsa.percent});
                        note(fmt::format("{} {} n_s={} n_p={}: kMAPE {:.4g}% kMdSA {:.4g}%", model,
                                         country, n_s, n_p, result.kmape.percent,
                                         result.kmdsa.percent));
                        if (config.emit_plots) {
                            plot_for(country, n_p)
                                .models.push_back({fmt::format("{} (n_s={})", model, n_s),
                                                   result.forecasts.back()});
                        }
                    } catch (const Error& e) {
                        fail(n_p, e.what());
                    }
                }
            }
        }
    }
    for (std::size_t i = 0; i < plots.size(); ++i) {
        output.plots.emplace_back(
            fmt::format("plot_{}_np{}.svg", plot_keys[i].first, plot_keys[i].second),
            std::move(plots[i]));
    }
    return output;
}

void write_outputs(const ExperimentConfig& config, const BenchmarkOutput& output) {
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec) {
        throw Error(ErrorKind::IoFailure,
                    "cannot create '" + config.output_dir.string() + "': " + ec.message());
    }
    const auto name = fmt::format("report.{}", to_string(config.report_format));
    emit_report(output.report, config.report_format, config.output_dir / name);
    for (const auto& [file, plot] : output.plots) {
        if (!plot.models.empty()) emit_plot(plot, config.output_dir / file);
    }
}

}  // namespace epicast::app
