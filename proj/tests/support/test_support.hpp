#pragma once

// Small hand-rolled generators shared by the property tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace epicast::testing {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double normal(double sigma) { return std::normal_distribution<double>(0.0, sigma)(rng_); }
    std::size_t index(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
    }

    std::vector<double> positive(std::size_t n, double lo = 1.0, double hi = 1e5) {
        std::vector<double> out(n);
        for (auto& v : out) v = uniform(lo, hi);
        return out;
    }

    /// Predictions near `actuals`: each perturbed by a factor in [1 - spread, 1 + spread].
    std::vector<double> near(const std::vector<double>& actuals, double spread = 0.3) {
        std::vector<double> out(actuals.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = actuals[i] * uniform(1 - spread, 1 + spread);
        return out;
    }

    std::vector<std::vector<double>> matrix(std::size_t rows, std::size_t cols, double lo, double hi) {
        std::vector<std::vector<double>> out(rows);
        for (auto& r : out) r = positive(cols, lo, hi);
        return out;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

/// Cumulative-count-like series: positive, non-decreasing, noisy growth.
inline std::vector<double> growth_series(Gen& gen, std::size_t n, double start = 120.0) {
    std::vector<double> out(n);
    double level = start;
    double rate = gen.uniform(0.02, 0.12);
    for (auto& v : out) {
        v = std::round(level);
        rate = std::max(0.002, rate * gen.uniform(0.93, 1.0));
        level *= 1.0 + rate * gen.uniform(0.7, 1.3);
    }
    return out;
}

inline double relative_error(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace epicast::testing
