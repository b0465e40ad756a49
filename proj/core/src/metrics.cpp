#include "epicast/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "epicast/error.hpp"

namespace epicast {

namespace {

void require_same_length(std::span<const double> actuals, std::span<const double> predictions) {
    if (actuals.size() != predictions.size()) {
        throw Error(ErrorKind::LengthMismatch,
                    fmt::format("{} actuals vs {} predictions", actuals.size(),
                                predictions.size()));
    }
    if (actuals.empty()) {
        throw Error(ErrorKind::LengthMismatch, "metric needs at least one value");
    }
}

std::vector<double> flatten(const std::vector<std::vector<double>>& rows, std::size_t width) {
    std::vector<double> flat;
    flat.reserve(rows.size() * width);
    for (const auto& row : rows) {
        if (row.size() != width) {
            throw Error(ErrorKind::ShapeMismatch, "ragged horizon matrix");
        }
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return flat;
}

double median_in_place(std::vector<double>& values) {
    const std::size_t n = values.size();
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(values.begin(), mid, values.end());
    const double upper = *mid;
    if (n % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(values.begin(), mid);
    return 0.5 * (lower + upper);
}

}  // namespace

HorizonPredictions::HorizonPredictions(std::vector<std::vector<double>> actuals,
                                       std::vector<std::vector<double>> predictions) {
    if (actuals.empty() || actuals.size() != predictions.size()) {
        throw Error(ErrorKind::ShapeMismatch,
                    fmt::format("need matching non-empty row counts, got {} and {}",
                                actuals.size(), predictions.size()));
    }
    sequences_ = actuals.size();
    horizon_ = actuals.front().size();
    if (horizon_ == 0) {
        throw Error(ErrorKind::ShapeMismatch, "horizon must be >= 1");
    }
    actuals_ = flatten(actuals, horizon_);
    predictions_ = flatten(predictions, horizon_);
    for (double a : actuals_) {
        if (!(a > 0.0) || !std::isfinite(a)) {
            throw Error(ErrorKind::NonPositiveValue,
                        fmt::format("actual value {} is not strictly positive", a));
        }
    }
}

std::vector<double> HorizonPredictions::actual_column(std::size_t i) const {
    std::vector<double> column(sequences_);
    for (std::size_t p = 0; p < sequences_; ++p) column[p] = actual(p, i);
    return column;
}

std::vector<double> HorizonPredictions::predicted_column(std::size_t i) const {
    std::vector<double> column(sequences_);
    for (std::size_t p = 0; p < sequences_; ++p) column[p] = predicted(p, i);
    return column;
}

std::vector<std::vector<double>> HorizonPredictions::actual_rows() const {
    std::vector<std::vector<double>> rows;
    for (std::size_t p = 0; p < sequences_; ++p) {
        const auto begin = actuals_.begin() + static_cast<std::ptrdiff_t>(p * horizon_);
        rows.emplace_back(begin, begin + static_cast<std::ptrdiff_t>(horizon_));
    }
    return rows;
}

std::vector<std::vector<double>> HorizonPredictions::predicted_rows() const {
    std::vector<std::vector<double>> rows;
    for (std::size_t p = 0; p < sequences_; ++p) {
        const auto begin = predictions_.begin() + static_cast<std::ptrdiff_t>(p * horizon_);
        rows.emplace_back(begin, begin + static_cast<std::ptrdiff_t>(horizon_));
    }
    return rows;
}

MetricValue mape(std::span<const double> actuals, std::span<const double> predictions) {
    require_same_length(actuals, predictions);
    double sum = 0.0;
    for (std::size_t i = 0; i < actuals.size(); ++i) {
        if (actuals[i] == 0.0) {
            throw Error(ErrorKind::ZeroActual, fmt::format("actual value {} is zero", i));
        }
        sum += std::abs(predictions[i] - actuals[i]) / std::abs(actuals[i]);
    }
    return {100.0 * sum / static_cast<double>(actuals.size())};
}

MetricValue mdsa(std::span<const double> actuals, std::span<const double> predictions) {
    require_same_length(actuals, predictions);
    std::vector<double> log_ratios(actuals.size());
    for (std::size_t j = 0; j < actuals.size(); ++j) {
        if (!(actuals[j] > 0.0) || !(predictions[j] > 0.0)) {
            throw Error(ErrorKind::NonPositiveValue,
                        fmt::format("pair {} ({}, {}) is not strictly positive", j, actuals[j],
                                    predictions[j]));
        }
        log_ratios[j] = std::abs(std::log(predictions[j] / actuals[j]));
    }
    return {100.0 * std::expm1(median_in_place(log_ratios))};
}

MetricValue k_period_metric(const HorizonPredictions& data, const BaseMetric& base) {
    double sum = 0.0;
    for (std::size_t i = 0; i < data.horizon(); ++i) {
        const auto actual = data.actual_column(i);
        const auto predicted = data.predicted_column(i);
        sum += base(actual, predicted).percent;
    }
    return {sum / static_cast<double>(data.horizon())};
}

MetricValue kmape(const HorizonPredictions& data) { return k_period_metric(data, mape); }

MetricValue kmdsa(const HorizonPredictions& data) { return k_period_metric(data, mdsa); }

}  // namespace epicast
