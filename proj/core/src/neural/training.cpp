#include "epicast/neural/training.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include <fmt/format.h>

#include "epicast/error.hpp"
#include "epicast/neural/adam.hpp"

namespace epicast::neural {

namespace {

struct InitRun {
    std::optional<NetworkModel> model;
    std::vector<std::optional<double>> scores;  // per horizon
};

NetworkModel fit_weights(const NetworkConfig& config, std::span<const TrainingExample> batch) {
    NetworkModel model = initialize_model(config);
    AdamState adam = AdamState::for_weights(model.weights);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto step = backward(model, batch);
        if (!std::isfinite(step.loss)) {
            throw Error(ErrorKind::NumericalDivergence,
                        fmt::format("loss became non-finite at epoch {} (seed {})", epoch,
                                    config.seed));
        }
        adam_step(model.weights, step.gradients, adam, config.learning_rate);
    }
    return model;
}

InitRun run_init(const NetworkConfig& config, const SupervisedSplit& split,
                 std::span<const TrainingExample> batch, std::span<const std::size_t> horizons) {
    InitRun run;
    run.scores.assign(horizons.size(), std::nullopt);
    try {
        run.model = fit_weights(config, batch);
    } catch (const Error&) {
        return run;
    }
    for (std::size_t h = 0; h < horizons.size(); ++h) {
        try {
            const double score = validation_kmape(*run.model, split.validation, horizons[h]).percent;
            if (std::isfinite(score)) run.scores[h] = score;
        } catch (const Error&) {
        }
    }
    return run;
}

std::vector<InitRun> run_all(const NetworkConfig& config, const SupervisedSplit& split,
                             const MultiInitOptions& options,
                             std::span<const std::size_t> horizons) {
    if (options.n_inits == 0) {
        throw Error(ErrorKind::InvalidArgument, "need at least one initialization");
    }
    if (split.train.empty() || split.validation.empty()) {
        throw Error(ErrorKind::TooFewSamples, "training and validation sets must be non-empty");
    }
    config.validate();
    const auto batch = training_examples(split.train);
    std::vector<InitRun> runs(options.n_inits);
    const auto work = [&](std::size_t i) {
        NetworkConfig seeded = config;
        seeded.seed = config.seed + i;
        runs[i] = run_init(seeded, split, batch, horizons);
    };
    const std::size_t workers = std::min(std::max<std::size_t>(options.parallelism, 1),
                                         options.n_inits);
    if (workers == 1) {
        for (std::size_t i = 0; i < options.n_inits; ++i) work(i);
        return runs;
    }
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < options.n_inits; i = next++) work(i);
            });
        }
    }  // joined here, before `runs` is handed back
    return runs;
}

}  // namespace

std::vector<TrainingExample> training_examples(std::span<const WindowSample> samples) {
    std::vector<TrainingExample> batch;
    batch.reserve(samples.size());
    for (const auto& s : samples) {
        if (s.targets.empty()) {
            throw Error(ErrorKind::InvalidArgument, "window sample without a target");
        }
        batch.push_back({s.inputs, s.targets.front()});
    }
    return batch;
}

MetricValue validation_kmape(const NetworkModel& model, std::span<const WindowSample> samples,
                             std::size_t horizon) {
    const NetworkForecaster forecaster(model);
    const auto forecasts = forecast_all(forecaster, samples, horizon);
    if (forecasts.empty()) {
        throw Error(ErrorKind::TooFewSamples,
                    fmt::format("no validation sample has {} targets", horizon));
    }
    std::vector<std::vector<double>> actual;
    std::vector<std::vector<double>> predicted;
    for (const auto& s : samples) {
        if (s.targets.size() >= horizon) {
            actual.emplace_back(s.targets.begin(),
                                s.targets.begin() + static_cast<std::ptrdiff_t>(horizon));
        }
    }
    for (const auto& f : forecasts) predicted.push_back(f.predictions);
    return kmape(HorizonPredictions(std::move(actual), std::move(predicted)));
}

TrainResult train(const NetworkConfig& config, const SupervisedSplit& split,
                  std::size_t horizon) {
    config.validate();
    if (split.train.empty() || split.validation.empty()) {
        throw Error(ErrorKind::TooFewSamples, "training and validation sets must be non-empty");
    }
    const auto batch = training_examples(split.train);
    NetworkModel model = fit_weights(config, batch);
    const auto score = validation_kmape(model, split.validation, horizon);
    if (!std::isfinite(score.percent)) {
        throw Error(ErrorKind::NumericalDivergence, "validation kMAPE is not finite");
    }
    return {std::move(model), score, 0};
}

std::size_t select_best_init(std::span<const std::optional<double>> scores) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!scores[i] || !std::isfinite(*scores[i])) continue;
        if (!best || *scores[i] < *scores[*best]) best = i;
    }
    if (!best) {
        throw Error(ErrorKind::AllInitsDiverged,
                    fmt::format("all {} initializations diverged", scores.size()));
    }
    return *best;
}

TrainResult multi_init_train(const NetworkConfig& config, const SupervisedSplit& split,
                             const MultiInitOptions& options, std::size_t horizon) {
    const std::size_t horizons[] = {horizon};
    return std::move(multi_init_train(config, split, options, horizons).front());
}

std::vector<TrainResult> multi_init_train(const NetworkConfig& config,
                                          const SupervisedSplit& split,
                                          const MultiInitOptions& options,
                                          std::span<const std::size_t> horizons) {
    auto runs = run_all(config, split, options, horizons);
    std::vector<TrainResult> results;
    for (std::size_t h = 0; h < horizons.size(); ++h) {
        std::vector<std::optional<double>> scores;
        for (const auto& run : runs) scores.push_back(run.model ? run.scores[h] : std::nullopt);
        const std::size_t best = select_best_init(scores);
        results.push_back({*runs[best].model, MetricValue{*scores[best]}, best});
    }
    return results;
}

}  // namespace epicast::neural
