#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "epicast/metrics.hpp"
#include "epicast/series.hpp"

namespace epicast {

/**
 * @brief One-step-ahead predictor over a fixed-length window of raw counts.
 *
 * predict_next must be deterministic. Models whose one-step rule depends on the
 * window they were anchored at (ARIMA keeps coefficients frozen while a
 * rollout appends its own predictions) override anchored_at.
 */
class Forecaster {
public:
    virtual ~Forecaster() = default;

    [[nodiscard]] virtual std::size_t window_length() const noexcept = 0;
    [[nodiscard]] virtual double predict_next(std::span<const double> window) const = 0;

    /// Forecaster to use for a rollout starting at `window`; nullptr means this one.
    [[nodiscard]] virtual std::shared_ptr<const Forecaster> anchored_at(
        std::span<const double> window) const;
};

struct ForecastResult {
    std::vector<double> predictions;
    std::size_t source_window_end = 0;

    [[nodiscard]] std::size_t horizon() const noexcept { return predictions.size(); }
};

/**
 * @brief Iterated forecast: each prediction is appended to the window and the
 * oldest value dropped before predicting the next step.
 */
[[nodiscard]] ForecastResult recursive_forecast(const Forecaster& forecaster,
                                                std::span<const double> window,
                                                std::size_t n_p,
                                                std::size_t source_window_end = 0);

struct Evaluation {
    MetricValue kmape;
    MetricValue kmdsa;
    HorizonPredictions raw;
    std::vector<ForecastResult> forecasts;
};

/// Samples whose targets are shorter than n_p are skipped; at least one must remain.
[[nodiscard]] Evaluation evaluate(const Forecaster& forecaster,
                                  std::span<const WindowSample> test, std::size_t n_p);

/// Forecast matrix only (no metrics); used where predictions may be non-positive.
[[nodiscard]] std::vector<ForecastResult> forecast_all(const Forecaster& forecaster,
                                                       std::span<const WindowSample> samples,
                                                       std::size_t n_p);

/// Repeats the last observed value.
class PersistenceForecaster final : public Forecaster {
public:
    explicit PersistenceForecaster(std::size_t n_s) : n_s_(n_s) {}

    [[nodiscard]] std::size_t window_length() const noexcept override { return n_s_; }
    [[nodiscard]] double predict_next(std::span<const double> window) const override;

private:
    std::size_t n_s_;
};

}  // namespace epicast
