#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "epicast/forecast.hpp"
#include "epicast/metrics.hpp"
#include "epicast/neural/network.hpp"
#include "epicast/series.hpp"

namespace epicast::neural {

/// Adapts a trained network to the Forecaster interface.
class NetworkForecaster final : public Forecaster {
public:
    explicit NetworkForecaster(NetworkModel model) : model_(std::move(model)) {}

    [[nodiscard]] std::size_t window_length() const noexcept override { return model_.config.n_s; }
    [[nodiscard]] double predict_next(std::span<const double> window) const override {
        return model_forward(model_, window);
    }

    [[nodiscard]] const NetworkModel& model() const noexcept { return model_; }

private:
    NetworkModel model_;
};

/// Each window paired with its first target.
[[nodiscard]] std::vector<TrainingExample> training_examples(std::span<const WindowSample> samples);

/// Recursive-forecast kMAPE of `model` over `samples` at `horizon`.
[[nodiscard]] MetricValue validation_kmape(const NetworkModel& model,
                                           std::span<const WindowSample> samples,
                                           std::size_t horizon);

struct TrainResult {
    NetworkModel model;
    MetricValue validation_kmape;
    std::size_t seed_offset = 0;
};

/**
 * @brief Single initialization: full-batch Adam for config.epochs epochs.
 *
 * Throws Error(NumericalDivergence) if the loss or the validation score
 * becomes non-finite.
 */
[[nodiscard]] TrainResult train(const NetworkConfig& config, const SupervisedSplit& split,
                                std::size_t horizon = 1);

/// Index of the smallest finite score, lowest index on ties; nullopt marks a diverged run.
[[nodiscard]] std::size_t select_best_init(std::span<const std::optional<double>> scores);

struct MultiInitOptions {
    std::size_t n_inits = 100;
    /// Worker threads; the selected model does not depend on it.
    std::size_t parallelism = 1;
};

/// Trains seeds config.seed + 0 .. n_inits - 1 and keeps the best validation kMAPE.
[[nodiscard]] TrainResult multi_init_train(const NetworkConfig& config,
                                           const SupervisedSplit& split,
                                           const MultiInitOptions& options,
                                           std::size_t horizon = 1);

/// Same sweep, each init trained once and scored at every horizon; one winner per horizon.
[[nodiscard]] std::vector<TrainResult> multi_init_train(const NetworkConfig& config,
                                                        const SupervisedSplit& split,
                                                        const MultiInitOptions& options,
                                                        std::span<const std::size_t> horizons);

}  // namespace epicast::neural
