#pragma once

#include <cstdint>

#include "epicast/neural/network.hpp"

namespace epicast::neural {

struct AdamState {
    ParameterSet first_moment;
    ParameterSet second_moment;
    std::uint64_t step_count = 0;

    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEpsilon = 1e-8;

    /// Zero moments mirroring `weights`.
    [[nodiscard]] static AdamState for_weights(const ParameterSet& weights);
};

/// One bias-corrected Adam update of `weights` in place.
void adam_step(ParameterSet& weights, const ParameterSet& gradients, AdamState& state,
               double learning_rate);

}  // namespace epicast::neural
