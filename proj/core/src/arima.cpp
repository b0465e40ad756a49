#include "epicast/arima.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "epicast/error.hpp"

namespace epicast::arima {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd least_squares(const MatrixXd& design, const VectorXd& response) {
    return design.completeOrthogonalDecomposition().solve(response);
}

struct Coefficients {
    double intercept = 0.0;
    std::vector<double> ar;
    std::vector<double> ma;
};

VectorXd pack(const Coefficients& coeffs) {
    const auto p = static_cast<Eigen::Index>(coeffs.ar.size());
    const auto q = static_cast<Eigen::Index>(coeffs.ma.size());
    VectorXd beta(1 + p + q);
    beta(0) = coeffs.intercept;
    for (Eigen::Index i = 0; i < p; ++i) beta(1 + i) = coeffs.ar[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < q; ++j) beta(1 + p + j) = coeffs.ma[static_cast<std::size_t>(j)];
    return beta;
}

Coefficients unpack(const VectorXd& beta, int p, int q) {
    Coefficients coeffs;
    coeffs.intercept = beta(0);
    for (int i = 0; i < p; ++i) coeffs.ar.push_back(beta(1 + i));
    for (int j = 0; j < q; ++j) coeffs.ma.push_back(beta(1 + p + j));
    return coeffs;
}

double sum_of_squares(std::span<const double> residuals, int p) {
    double total = 0.0;
    for (std::size_t t = static_cast<std::size_t>(p); t < residuals.size(); ++t) {
        total += residuals[t] * residuals[t];
    }
    return total;
}

double objective(std::span<const double> w, int p, const Coefficients& coeffs) {
    const auto e = css_residuals(w, p, coeffs.intercept, coeffs.ar, coeffs.ma);
    const double css = sum_of_squares(e, p);
    return std::isfinite(css) ? css : std::numeric_limits<double>::infinity();
}

// Rows t >= p of d e_t / d beta, following the CSS recursion.
MatrixXd residual_jacobian(std::span<const double> w, std::span<const double> e, int p,
                           const Coefficients& coeffs) {
    const int q = static_cast<int>(coeffs.ma.size());
    const int m = static_cast<int>(w.size());
    const int k = 1 + p + q;
    MatrixXd full = MatrixXd::Zero(m, k);
    for (int t = p; t < m; ++t) {
        full(t, 0) = -1.0;
        for (int i = 0; i < p; ++i) full(t, 1 + i) = -w[static_cast<std::size_t>(t - 1 - i)];
        for (int j = 0; j < q; ++j) {
            const int lag = t - 1 - j;
            if (lag < 0) continue;
            full(t, 1 + p + j) -= e[static_cast<std::size_t>(lag)];
            full.row(t) -= coeffs.ma[static_cast<std::size_t>(j)] * full.row(lag);
        }
    }
    return full.bottomRows(m - p);
}

// Ordinary least squares of w_t on [1, w_{t-1..t-p}] for t >= p.
Coefficients fit_autoregression(std::span<const double> w, int p) {
    const int m = static_cast<int>(w.size());
    const int rows = m - p;
    MatrixXd design(rows, 1 + p);
    VectorXd response(rows);
    for (int r = 0; r < rows; ++r) {
        const int t = r + p;
        design(r, 0) = 1.0;
        for (int i = 0; i < p; ++i) design(r, 1 + i) = w[static_cast<std::size_t>(t - 1 - i)];
        response(r) = w[static_cast<std::size_t>(t)];
    }
    const VectorXd beta = least_squares(design, response);
    Coefficients coeffs;
    coeffs.intercept = beta(0);
    for (int i = 0; i < p; ++i) coeffs.ar.push_back(beta(1 + i));
    return coeffs;
}

// Long autoregression supplies innovation proxies; a second regression on lagged
// values and lagged proxies gives the ARMA starting point.
std::optional<Coefficients> hannan_rissanen(std::span<const double> w, int p, int q) {
    const int m = static_cast<int>(w.size());
    const int long_order = std::min(std::max(p + q, 3), (m - 1) / 2);
    if (long_order < 1) return std::nullopt;
    const Coefficients long_ar = fit_autoregression(w, long_order);
    std::vector<double> proxy(w.size(), 0.0);
    for (int t = long_order; t < m; ++t) {
        double pred = long_ar.intercept;
        for (int i = 0; i < long_order; ++i) {
            pred += long_ar.ar[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(t - 1 - i)];
        }
        proxy[static_cast<std::size_t>(t)] = w[static_cast<std::size_t>(t)] - pred;
    }
    const int start = std::max(p, long_order + q);
    const int rows = m - start;
    if (rows < 1) return std::nullopt;
    MatrixXd design(rows, 1 + p + q);
    VectorXd response(rows);
    for (int r = 0; r < rows; ++r) {
        const int t = r + start;
        design(r, 0) = 1.0;
        for (int i = 0; i < p; ++i) design(r, 1 + i) = w[static_cast<std::size_t>(t - 1 - i)];
        for (int j = 0; j < q; ++j) design(r, 1 + p + j) = proxy[static_cast<std::size_t>(t - 1 - j)];
        response(r) = w[static_cast<std::size_t>(t)];
    }
    return unpack(least_squares(design, response), p, q);
}

bool zero_variance(std::span<const double> w) {
    const double first = w.front();
    const double scale = std::max(1.0, std::abs(first));
    return std::all_of(w.begin(), w.end(),
                       [&](double v) { return std::abs(v - first) <= 1e-12 * scale; });
}

}  // namespace

void ArimaOrders::validate() const {
    for (int order : {p, d, q}) {
        if (order < 0 || order > kMaxOrder) {
            throw Error(ErrorKind::InvalidArgument,
                        fmt::format("ARIMA orders ({}, {}, {}) outside [0, {}]", p, d, q,
                                    kMaxOrder));
        }
    }
}

std::vector<double> difference(std::span<const double> values, int d) {
    if (d < 0) {
        throw Error(ErrorKind::InvalidArgument, "differencing degree must be >= 0");
    }
    if (values.size() <= static_cast<std::size_t>(d)) {
        throw Error(ErrorKind::SeriesTooShort,
                    fmt::format("cannot difference {} values {} times", values.size(), d));
    }
    std::vector<double> out(values.begin(), values.end());
    for (int level = 0; level < d; ++level) {
        for (std::size_t i = 0; i + 1 < out.size(); ++i) out[i] = out[i + 1] - out[i];
        out.pop_back();
    }
    return out;
}

std::vector<double> integrate(std::span<const double> diff_forecasts,
                              std::span<const double> tail, int d) {
    if (d < 0) {
        throw Error(ErrorKind::InvalidArgument, "differencing degree must be >= 0");
    }
    if (tail.size() < static_cast<std::size_t>(d)) {
        throw Error(ErrorKind::InsufficientTail,
                    fmt::format("need {} trailing values, got {}", d, tail.size()));
    }
    // last_level[k] is the trailing value of the k-times differenced series.
    const auto recent = tail.last(static_cast<std::size_t>(d));
    std::vector<double> last_level(static_cast<std::size_t>(d));
    std::vector<double> level(recent.begin(), recent.end());
    for (int k = 0; k < d; ++k) {
        last_level[static_cast<std::size_t>(k)] = level.back();
        for (std::size_t i = 0; i + 1 < level.size(); ++i) level[i] = level[i + 1] - level[i];
        level.pop_back();
    }
    std::vector<double> out;
    out.reserve(diff_forecasts.size());
    for (double value : diff_forecasts) {
        double carry = value;
        for (int k = d - 1; k >= 0; --k) {
            auto& slot = last_level[static_cast<std::size_t>(k)];
            slot += carry;
            carry = slot;
        }
        out.push_back(carry);
    }
    return out;
}

std::vector<double> css_residuals(std::span<const double> differenced, int p, double intercept,
                                  std::span<const double> ar, std::span<const double> ma) {
    const std::size_t m = differenced.size();
    std::vector<double> e(m, 0.0);
    for (std::size_t t = static_cast<std::size_t>(p); t < m; ++t) {
        double pred = intercept;
        for (std::size_t i = 0; i < ar.size(); ++i) pred += ar[i] * differenced[t - 1 - i];
        for (std::size_t j = 0; j < ma.size() && j + 1 <= t; ++j) pred += ma[j] * e[t - 1 - j];
        e[t] = differenced[t] - pred;
    }
    return e;
}

ArimaModel fit_arima(std::span<const double> values, const ArimaOrders& orders,
                     const FitOptions& options) {
    orders.validate();
    const auto [p, d, q] = orders;
    const std::size_t needed = static_cast<std::size_t>(d + std::max(p, q) + 3);
    if (values.size() < needed) {
        throw Error(ErrorKind::SeriesTooShort,
                    fmt::format("ARIMA({}, {}, {}) needs {} values, got {}", p, d, q, needed,
                                values.size()));
    }
    ArimaModel model;
    model.orders = orders;
    model.history.assign(values.begin(), values.end());
    const auto w = difference(values, d);

    if (zero_variance(w)) {
        model.ar_coeffs.assign(static_cast<std::size_t>(p), 0.0);
        model.ma_coeffs.assign(static_cast<std::size_t>(q), 0.0);
        model.intercept = w.front();
        model.residuals.assign(w.size(), 0.0);
        return model;
    }

    Coefficients current = fit_autoregression(w, p);
    current.ma.assign(static_cast<std::size_t>(q), 0.0);
    double current_css = objective(w, p, current);
    if (q > 0) {
        if (auto start = hannan_rissanen(w, p, q)) {
            const double start_css = objective(w, p, *start);
            if (start_css < current_css) {
                current = std::move(*start);
                current_css = start_css;
            }
        }
    }

    bool converged = q == 0;  // pure AR: OLS already minimizes the CSS
    int iteration = 0;
    while (!converged && iteration < options.max_iterations && current_css > 0.0) {
        ++iteration;
        const auto e = css_residuals(w, p, current.intercept, current.ar, current.ma);
        const MatrixXd jacobian = residual_jacobian(w, e, p, current);
        VectorXd residual_vec(static_cast<Eigen::Index>(w.size()) - p);
        for (Eigen::Index r = 0; r < residual_vec.size(); ++r) {
            residual_vec(r) = e[static_cast<std::size_t>(r + p)];
        }
        const VectorXd step = least_squares(jacobian, -residual_vec);
        const VectorXd beta = pack(current);

        bool accepted = false;
        double scale = 1.0;
        for (int halving = 0; halving < 40; ++halving, scale *= 0.5) {
            const Coefficients trial = unpack(beta + scale * step, p, q);
            const double trial_css = objective(w, p, trial);
            if (trial_css < current_css) {
                const double change = (current_css - trial_css) / current_css;
                current = trial;
                current_css = trial_css;
                accepted = true;
                converged = change < options.relative_tolerance;
                break;
            }
        }
        if (!accepted) {
            converged = true;  // no descent direction left
        }
    }

    model.ar_coeffs = std::move(current.ar);
    model.ma_coeffs = std::move(current.ma);
    model.intercept = current.intercept;
    model.residuals = css_residuals(w, p, model.intercept, model.ar_coeffs, model.ma_coeffs);
    model.css = current_css;
    model.iterations = iteration;
    model.converged = converged || current_css == 0.0;
    return model;
}

ArimaModel ArimaModel::extended(std::span<const double> appended) const {
    ArimaModel out = *this;
    out.history.insert(out.history.end(), appended.begin(), appended.end());
    const auto w = difference(out.history, orders.d);
    for (std::size_t t = residuals.size(); t < w.size(); ++t) {
        double pred = intercept;
        for (std::size_t i = 0; i < ar_coeffs.size(); ++i) pred += ar_coeffs[i] * w[t - 1 - i];
        for (std::size_t j = 0; j < ma_coeffs.size() && j + 1 <= t; ++j) {
            pred += ma_coeffs[j] * out.residuals[t - 1 - j];
        }
        out.residuals.push_back(w[t] - pred);
    }
    return out;
}

double forecast_one(const ArimaModel& model) {
    if (model.history.empty()) {
        throw Error(ErrorKind::InvalidArgument, "ARIMA model has not been fitted");
    }
    const auto w = difference(model.history, model.orders.d);
    const std::size_t m = w.size();
    double next = model.intercept;
    for (std::size_t i = 0; i < model.ar_coeffs.size() && i < m; ++i) {
        next += model.ar_coeffs[i] * w[m - 1 - i];
    }
    for (std::size_t j = 0; j < model.ma_coeffs.size() && j < model.residuals.size(); ++j) {
        next += model.ma_coeffs[j] * model.residuals[model.residuals.size() - 1 - j];
    }
    const std::array<double, 1> step{next};
    return integrate(step, model.history, model.orders.d).front();
}

ArimaForecaster::ArimaForecaster(std::size_t n_s, ArimaOrders orders, FitOptions options)
    : n_s_(n_s), orders_(orders), options_(options) {
    orders_.validate();
}

double ArimaForecaster::predict_next(std::span<const double> window) const {
    if (window.size() != n_s_) {
        throw Error(ErrorKind::WindowLengthMismatch,
                    fmt::format("window of {} for ARIMA with n_s = {}", window.size(), n_s_));
    }
    return forecast_one(fit_arima(window, orders_, options_));
}

std::shared_ptr<const Forecaster> ArimaForecaster::anchored_at(
    std::span<const double> window) const {
    if (window.size() != n_s_) {
        throw Error(ErrorKind::WindowLengthMismatch,
                    fmt::format("window of {} for ARIMA with n_s = {}", window.size(), n_s_));
    }
    return std::make_shared<FrozenArimaForecaster>(fit_arima(window, orders_, options_));
}

FrozenArimaForecaster::FrozenArimaForecaster(ArimaModel model)
    : model_(std::move(model)), n_s_(model_.history.size()) {}

double FrozenArimaForecaster::predict_next(std::span<const double> window) const {
    if (window.size() != n_s_) {
        throw Error(ErrorKind::WindowLengthMismatch,
                    fmt::format("window of {} for ARIMA with n_s = {}", window.size(), n_s_));
    }
    const auto& history = model_.history;
    // Smallest shift under which the window continues the fitted history.
    std::size_t shift = 0;
    for (; shift < n_s_; ++shift) {
        const std::size_t overlap = n_s_ - shift;
        if (std::equal(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(overlap),
                       history.end() - static_cast<std::ptrdiff_t>(overlap))) {
            break;
        }
    }
    if (shift == 0) {
        return forecast_one(model_);
    }
    return forecast_one(model_.extended(window.last(shift)));
}

std::vector<ArimaOrders> default_order_grid() {
    std::vector<ArimaOrders> grid;
    for (int p = 1; p <= 3; ++p)
        for (int d = 1; d <= 3; ++d)
            for (int q = 1; q <= 3; ++q) grid.push_back({p, d, q});
    return grid;
}

ArimaOrders select_orders(std::span<const ArimaOrders> candidates, const OrderScorer& scorer) {
    std::optional<std::tuple<double, int, int, int, int>> best;
    for (const auto& orders : candidates) {
        const auto score = scorer(orders);
        if (!score || !std::isfinite(*score)) continue;
        const auto key = std::make_tuple(*score, orders.total(), orders.p, orders.d, orders.q);
        if (!best || key < *best) best = key;
    }
    if (!best) {
        throw Error(ErrorKind::NoViableOrders, "no candidate ARIMA orders could be fitted");
    }
    return {std::get<2>(*best), std::get<3>(*best), std::get<4>(*best)};
}

ArimaOrders grid_search_orders(std::span<const WindowSample> held_out, std::size_t n_s,
                               std::span<const ArimaOrders> candidates) {
    const OrderScorer scorer = [&](const ArimaOrders& orders) -> std::optional<double> {
        try {
            const ArimaForecaster forecaster(n_s, orders);
            const auto forecasts = forecast_all(forecaster, held_out, 1);
            if (forecasts.empty()) return std::nullopt;
            std::vector<std::vector<double>> actual;
            std::vector<std::vector<double>> predicted;
            for (const auto& forecast : forecasts) {
                predicted.push_back({forecast.predictions.front()});
            }
            for (const auto& sample : held_out) {
                if (!sample.targets.empty()) actual.push_back({sample.targets.front()});
            }
            return kmape(HorizonPredictions(std::move(actual), std::move(predicted))).percent;
        } catch (const Error&) {
            return std::nullopt;
        }
    };
    return select_orders(candidates, scorer);
}

ArimaOrders grid_search_orders(std::span<const double> values, std::size_t n_s,
                               std::size_t held_out) {
    auto windows = make_windows(values, n_s, 1);
    if (windows.size() < held_out || held_out == 0) {
        throw Error(ErrorKind::TooFewSamples,
                    fmt::format("{} windows cannot provide {} held-out samples", windows.size(),
                                held_out));
    }
    const std::span<const WindowSample> tail(windows.end() - static_cast<std::ptrdiff_t>(held_out),
                                             windows.end());
    const auto grid = default_order_grid();
    return grid_search_orders(tail, n_s, grid);
}

}  // namespace epicast::arima
