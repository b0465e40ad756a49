#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "epicast/neural/network.hpp"
#include "test_support.hpp"

namespace epicast::testing {

struct GradientMismatch {
    std::string tensor;
    std::size_t index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

struct GradientCheckResult {
    std::size_t checked = 0;
    std::vector<GradientMismatch> mismatches;
    /// Largest |analytic - numeric| / allowed over all entries; below 1 means every entry passed.
    double worst_ratio = 0.0;
};

inline constexpr double kFiniteDifferenceStep = 1e-5;
inline constexpr double kGradientRelTolerance = 1e-4;
inline constexpr double kGradientAbsFloor = 1e-7;

/// Compares backward() against central differences of batch_loss() for every weight.
inline GradientCheckResult check_gradients(neural::NetworkModel model,
                                           const std::vector<neural::TrainingExample>& batch) {
    const auto analytic = neural::backward(model, batch);
    GradientCheckResult result;
    for (std::size_t t = 0; t < model.weights.size(); ++t) {
        auto& values = model.weights[t].values;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double original = values[i];
            values[i] = original + kFiniteDifferenceStep;
            const double plus = neural::batch_loss(model, batch);
            values[i] = original - kFiniteDifferenceStep;
            const double minus = neural::batch_loss(model, batch);
            values[i] = original;
            const double numeric = (plus - minus) / (2 * kFiniteDifferenceStep);
            const double exact = analytic.gradients[t].values[i];
            const double allowed = std::max(
                kGradientAbsFloor, kGradientRelTolerance * std::max(std::abs(numeric), std::abs(exact)));
            const double ratio = std::abs(numeric - exact) / allowed;
            ++result.checked;
            result.worst_ratio = std::max(result.worst_ratio, ratio);
            if (!(ratio <= 1.0)) result.mismatches.push_back({model.weights[t].name, i, exact, numeric});
        }
    }
    return result;
}

/// Model with seeded weights stretched from [-0.05, 0.05] to [-0.05 spread, 0.05 spread], so
/// the gates operate away from their linear region.
inline neural::NetworkModel spread_model(neural::NetworkConfig config, std::uint64_t seed,
                                         double spread = 10.0) {
    config.seed = seed;
    auto model = neural::initialize_model(config);
    for (auto& t : model.weights) {
        for (auto& v : t.values) v *= spread;
    }
    return model;
}

/// Positive, growing windows with targets near the next value.
inline std::vector<neural::TrainingExample> growth_batch(Gen& gen, std::size_t n_s, std::size_t count) {
    std::vector<neural::TrainingExample> batch;
    for (std::size_t b = 0; b < count; ++b) {
        neural::TrainingExample ex;
        double level = gen.uniform(100, 1000);
        for (std::size_t t = 0; t < n_s; ++t) {
            ex.window.push_back(level);
            level *= gen.uniform(1.0, 1.2);
        }
        ex.target = level * gen.uniform(0.9, 1.3);
        batch.push_back(std::move(ex));
    }
    return batch;
}

/// Tiny configurations covering every architecture and both conv framings.
inline std::vector<neural::NetworkConfig> tiny_gradient_configs() {
    using neural::Architecture;
    const auto make = [](Architecture arch, std::size_t n_s, std::size_t n_n, std::size_t kernel,
                         std::size_t pool, std::size_t subsequences) {
        neural::NetworkConfig c;
        c.architecture = arch;
        c.n_s = n_s;
        c.n_n = n_n;
        c.n_f = 3;
        c.kernel_size = kernel;
        c.pool_size = pool;
        c.subsequences = subsequences;
        return c;
    };
    return {
        make(Architecture::Vanilla, 3, 4, 2, 2, 1),
        make(Architecture::Stacked, 4, 3, 2, 2, 1),
        make(Architecture::Bidirectional, 4, 3, 2, 2, 1),
        make(Architecture::CnnLstm, 4, 3, 2, 1, 2),
        make(Architecture::CnnLstm, 4, 3, 2, 2, 1),
        make(Architecture::ConvLstm, 4, 2, 3, 1, 1),
        make(Architecture::ConvLstm, 4, 2, 2, 1, 2),
    };
}

}  // namespace epicast::testing
