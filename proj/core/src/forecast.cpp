#include "epicast/forecast.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "epicast/error.hpp"

namespace epicast {

std::shared_ptr<const Forecaster> Forecaster::anchored_at(std::span<const double>) const {
    return nullptr;
}

ForecastResult recursive_forecast(const Forecaster& forecaster, std::span<const double> window,
                                  std::size_t n_p, std::size_t source_window_end) {
    if (window.size() != forecaster.window_length()) {
        throw Error(ErrorKind::WindowLengthMismatch,
                    fmt::format("window of {} for a forecaster expecting {}", window.size(),
                                forecaster.window_length()));
    }
    if (n_p == 0) {
        throw Error(ErrorKind::InvalidArgument, "horizon must be >= 1");
    }
    const auto anchored = forecaster.anchored_at(window);
    const Forecaster& stepper = anchored ? *anchored : forecaster;

    ForecastResult result;
    result.source_window_end = source_window_end;
    result.predictions.reserve(n_p);
    std::vector<double> current(window.begin(), window.end());
    for (std::size_t step = 0; step < n_p; ++step) {
        const double next = stepper.predict_next(current);
        if (!std::isfinite(next)) {
            throw Error(ErrorKind::NumericalDivergence,
                        fmt::format("non-finite prediction at step {}", step + 1));
        }
        result.predictions.push_back(next);
        std::shift_left(current.begin(), current.end(), 1);
        current.back() = next;
    }
    return result;
}

std::vector<ForecastResult> forecast_all(const Forecaster& forecaster,
                                         std::span<const WindowSample> samples, std::size_t n_p) {
    std::vector<ForecastResult> forecasts;
    for (const auto& sample : samples) {
        if (sample.targets.size() < n_p) {
            continue;
        }
        forecasts.push_back(
            recursive_forecast(forecaster, sample.inputs, n_p, sample.window_end_index));
    }
    return forecasts;
}

Evaluation evaluate(const Forecaster& forecaster, std::span<const WindowSample> test,
                    std::size_t n_p) {
    auto forecasts = forecast_all(forecaster, test, n_p);
    if (forecasts.empty()) {
        throw Error(ErrorKind::TooFewSamples,
                    fmt::format("no test sample has {} target values", n_p));
    }
    std::vector<std::vector<double>> actuals;
    std::vector<std::vector<double>> predictions;
    for (const auto& sample : test) {
        if (sample.targets.size() >= n_p) {
            actuals.emplace_back(sample.targets.begin(),
                                 sample.targets.begin() + static_cast<std::ptrdiff_t>(n_p));
        }
    }
    for (const auto& forecast : forecasts) {
        predictions.push_back(forecast.predictions);
    }
    HorizonPredictions raw(std::move(actuals), std::move(predictions));
    const auto k_mape = kmape(raw);
    const auto k_mdsa = kmdsa(raw);
    return {k_mape, k_mdsa, std::move(raw), std::move(forecasts)};
}

double PersistenceForecaster::predict_next(std::span<const double> window) const {
    return window.back();
}

}  // namespace epicast
