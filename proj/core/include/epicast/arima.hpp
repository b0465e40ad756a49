#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "epicast/forecast.hpp"
#include "epicast/series.hpp"

namespace epicast::arima {

struct ArimaOrders {
    int p = 1;
    int d = 2;
    int q = 2;

    static constexpr int kMaxOrder = 5;

    /// Throws Error(InvalidArgument) unless every order is in [0, kMaxOrder].
    void validate() const;
    [[nodiscard]] int total() const noexcept { return p + d + q; }

    friend bool operator==(const ArimaOrders&, const ArimaOrders&) = default;
};

/**
 * @brief Fitted ARIMA(p, d, q) with intercept on the d-times differenced scale.
 *
 * w_t = c + sum_i ar[i] w_{t-1-i} + sum_j ma[j] e_{t-1-j} + e_t, where w is the
 * differenced history. Residuals align with w; the first p are conditioned out
 * and fixed at zero, as are innovations before the sample.
 */
struct ArimaModel {
    ArimaOrders orders;
    std::vector<double> ar_coeffs;
    std::vector<double> ma_coeffs;
    double intercept = 0.0;
    std::vector<double> residuals;
    std::vector<double> history;
    /// Conditional sum of squares at the final iterate.
    double css = 0.0;
    int iterations = 0;
    /// False when the iteration cap was hit before the tolerance; the best iterate is kept.
    bool converged = true;

    /// Copy whose history continues with `appended`; coefficients stay frozen and the
    /// innovation of each appended point is its one-step prediction error.
    [[nodiscard]] ArimaModel extended(std::span<const double> appended) const;
};

[[nodiscard]] std::vector<double> difference(std::span<const double> values, int d);

/**
 * @brief Inverts `d` levels of differencing for values that continue a series.
 *
 * `tail` holds the last raw values of the series (at least d of them); the
 * trailing value of every differencing level is reconstructed from it.
 */
[[nodiscard]] std::vector<double> integrate(std::span<const double> diff_forecasts,
                                            std::span<const double> tail, int d);

struct FitOptions {
    int max_iterations = 200;
    double relative_tolerance = 1e-8;
};

/// Conditional-sum-of-squares fit: Hannan-Rissanen start, Gauss-Newton refinement.
[[nodiscard]] ArimaModel fit_arima(std::span<const double> values, const ArimaOrders& orders,
                                   const FitOptions& options = {});

/// Residual sequence of the CSS recursion for given coefficients.
[[nodiscard]] std::vector<double> css_residuals(std::span<const double> differenced, int p,
                                                double intercept, std::span<const double> ar,
                                                std::span<const double> ma);

/// Next value on the raw scale with future innovations set to zero.
[[nodiscard]] double forecast_one(const ArimaModel& model);

/**
 * @brief Forecaster that fits on each window it is anchored at.
 *
 * predict_next on an un-anchored window fits and forecasts in one go; a rollout
 * (recursive_forecast) anchors once and keeps the coefficients frozen.
 */
class ArimaForecaster final : public Forecaster {
public:
    ArimaForecaster(std::size_t n_s, ArimaOrders orders, FitOptions options = {});

    [[nodiscard]] std::size_t window_length() const noexcept override { return n_s_; }
    [[nodiscard]] double predict_next(std::span<const double> window) const override;
    [[nodiscard]] std::shared_ptr<const Forecaster> anchored_at(
        std::span<const double> window) const override;

    [[nodiscard]] const ArimaOrders& orders() const noexcept { return orders_; }

private:
    std::size_t n_s_;
    ArimaOrders orders_;
    FitOptions options_;
};

/// Forecaster bound to one fitted model; windows are read as continuations of its history.
class FrozenArimaForecaster final : public Forecaster {
public:
    explicit FrozenArimaForecaster(ArimaModel model);

    [[nodiscard]] std::size_t window_length() const noexcept override { return n_s_; }
    [[nodiscard]] double predict_next(std::span<const double> window) const override;

    [[nodiscard]] const ArimaModel& model() const noexcept { return model_; }

private:
    ArimaModel model_;
    std::size_t n_s_;
};

/// All (p, d, q) in {1, 2, 3}^3, lexicographic.
[[nodiscard]] std::vector<ArimaOrders> default_order_grid();

/// Scores a candidate; nullopt marks a combination that could not be fitted.
using OrderScorer = std::function<std::optional<double>(const ArimaOrders&)>;

/// Argmin of the scorer; ties go to the smaller p + d + q, then lexicographic order.
[[nodiscard]] ArimaOrders select_orders(std::span<const ArimaOrders> candidates,
                                        const OrderScorer& scorer);

/// Grid search scored by 1-step kMAPE over held-out windows of length n_s.
[[nodiscard]] ArimaOrders grid_search_orders(std::span<const WindowSample> held_out,
                                             std::size_t n_s,
                                             std::span<const ArimaOrders> candidates);

/// Convenience: windows `values` at n_s and holds out the last `held_out` of them.
[[nodiscard]] ArimaOrders grid_search_orders(std::span<const double> values, std::size_t n_s,
                                             std::size_t held_out = 10);

}  // namespace epicast::arima
