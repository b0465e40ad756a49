#include "epicast/neural/adam.hpp"

#include <cmath>

#include "epicast/error.hpp"

namespace epicast::neural {

AdamState AdamState::for_weights(const ParameterSet& weights) {
    return {zeros_like(weights), zeros_like(weights), 0};
}

void adam_step(ParameterSet& weights, const ParameterSet& gradients, AdamState& state,
               double learning_rate) {
    if (!same_layout(weights, gradients) || !same_layout(weights, state.first_moment) ||
        !same_layout(weights, state.second_moment)) {
        throw Error(ErrorKind::ShapeMismatch, "Adam state and gradients must mirror the weights");
    }
    ++state.step_count;
    const double t = static_cast<double>(state.step_count);
    const double m_correction = 1.0 - std::pow(AdamState::kBeta1, t);
    const double v_correction = 1.0 - std::pow(AdamState::kBeta2, t);
    for (std::size_t k = 0; k < weights.size(); ++k) {
        auto& w = weights[k].values;
        const auto& g = gradients[k].values;
        auto& m = state.first_moment[k].values;
        auto& v = state.second_moment[k].values;
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = AdamState::kBeta1 * m[i] + (1.0 - AdamState::kBeta1) * g[i];
            v[i] = AdamState::kBeta2 * v[i] + (1.0 - AdamState::kBeta2) * g[i] * g[i];
            const double m_hat = m[i] / m_correction;
            const double v_hat = v[i] / v_correction;
            w[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + AdamState::kEpsilon);
        }
    }
}

}  // namespace epicast::neural
