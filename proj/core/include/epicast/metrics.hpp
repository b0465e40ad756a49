#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace epicast {

/// A forecast error expressed in percentage points (0.13 means 0.13%).
struct MetricValue {
    double percent = 0.0;

    friend bool operator==(const MetricValue&, const MetricValue&) = default;
};

/**
 * @brief P forecast sequences of horizon k, paired with the true values.
 *
 * Row p holds sequence p; column i holds forecast step i + 1. Actuals must be
 * strictly positive since both MAPE and MdSA divide by them.
 */
class HorizonPredictions {
public:
    HorizonPredictions(std::vector<std::vector<double>> actuals,
                       std::vector<std::vector<double>> predictions);

    [[nodiscard]] std::size_t sequences() const noexcept { return sequences_; }
    [[nodiscard]] std::size_t horizon() const noexcept { return horizon_; }

    [[nodiscard]] double actual(std::size_t p, std::size_t i) const {
        return actuals_[p * horizon_ + i];
    }
    [[nodiscard]] double predicted(std::size_t p, std::size_t i) const {
        return predictions_[p * horizon_ + i];
    }

    /// Values of every sequence at step i (0-based).
    [[nodiscard]] std::vector<double> actual_column(std::size_t i) const;
    [[nodiscard]] std::vector<double> predicted_column(std::size_t i) const;

    [[nodiscard]] std::vector<std::vector<double>> actual_rows() const;
    [[nodiscard]] std::vector<std::vector<double>> predicted_rows() const;

private:
    std::size_t sequences_ = 0;
    std::size_t horizon_ = 0;
    std::vector<double> actuals_;
    std::vector<double> predictions_;
};

using BaseMetric = std::function<MetricValue(std::span<const double> actuals,
                                             std::span<const double> predictions)>;

/// Mean absolute percentage error, 100/n * sum |pred - actual| / |actual|.
[[nodiscard]] MetricValue mape(std::span<const double> actuals,
                               std::span<const double> predictions);

/// Median symmetric accuracy, 100 * (exp(median |ln(pred / actual)|) - 1).
/// An even count takes the mean of the two central order statistics.
[[nodiscard]] MetricValue mdsa(std::span<const double> actuals,
                               std::span<const double> predictions);

/// Mean over forecast steps of `base` evaluated across all sequences at that step.
[[nodiscard]] MetricValue k_period_metric(const HorizonPredictions& data, const BaseMetric& base);

[[nodiscard]] MetricValue kmape(const HorizonPredictions& data);
[[nodiscard]] MetricValue kmdsa(const HorizonPredictions& data);

}  // namespace epicast
