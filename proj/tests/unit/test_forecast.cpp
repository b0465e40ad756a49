#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "epicast/error.hpp"
#include "epicast/forecast.hpp"
#include "test_support.hpp"

using namespace epicast;
using epicast::testing::Gen;

namespace {

class PlusOne final : public Forecaster {
public:
    explicit PlusOne(std::size_t n_s) : n_s_(n_s) {}
    std::size_t window_length() const noexcept override { return n_s_; }
    double predict_next(std::span<const double> w) const override { return w.back() + 1.0; }

private:
    std::size_t n_s_;
};

/// Weighted blend of the window; exercises every position of the shifted window.
class Blend final : public Forecaster {
public:
    explicit Blend(std::size_t n_s) : n_s_(n_s) {}
    std::size_t window_length() const noexcept override { return n_s_; }
    double predict_next(std::span<const double> w) const override {
        double out = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) out += w[i] * (0.3 + 0.7 * static_cast<double>(i + 1) / w.size());
        return out / static_cast<double>(w.size()) + 1.5;
    }

private:
    std::size_t n_s_;
};

/// Knows the series and returns its true continuation of any window it finds.
class Oracle final : public Forecaster {
public:
    Oracle(std::vector<double> series, std::size_t n_s) : series_(std::move(series)), n_s_(n_s) {}
    std::size_t window_length() const noexcept override { return n_s_; }
    double predict_next(std::span<const double> w) const override {
        const auto it = std::search(series_.begin(), series_.end(), w.begin(), w.end());
        return *(it + static_cast<std::ptrdiff_t>(w.size()));
    }

private:
    std::vector<double> series_;
    std::size_t n_s_;
};

class NanAfterFirst final : public Forecaster {
public:
    std::size_t window_length() const noexcept override { return 2; }
    double predict_next(std::span<const double> w) const override {
        return w.back() > 100 ? std::nan("") : 1000.0;
    }
};

/// Records the window it was anchored at and predicts from it, not the shifted one.
class AnchoredStub final : public Forecaster {
public:
    std::size_t window_length() const noexcept override { return 2; }
    double predict_next(std::span<const double> w) const override { return w.back(); }
    std::shared_ptr<const Forecaster> anchored_at(std::span<const double> w) const override {
        return std::make_shared<PlusOne>(w.size());
    }
};

std::vector<double> strictly_increasing(std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 100.0 + 10.0 * static_cast<double>(i * i);
    return v;
}

}  // namespace

TEST(RecursiveForecast, AppendAndShift) {
    const auto r = recursive_forecast(PlusOne(3), std::vector{1.0, 2.0, 3.0}, 3, 7);
    EXPECT_EQ(r.predictions, (std::vector<double>{4, 5, 6}));
    EXPECT_EQ(r.source_window_end, 7u);
    EXPECT_EQ(r.horizon(), 3u);
}

TEST(RecursiveForecast, SingleStepLeavesWindowUntouched) {
    const std::vector<double> w{1, 2, 3};
    const auto r = recursive_forecast(Blend(3), w, 1);
    ASSERT_EQ(r.predictions.size(), 1u);
    EXPECT_EQ(r.predictions[0], Blend(3).predict_next(w));
    EXPECT_EQ(w, (std::vector<double>{1, 2, 3}));
}

TEST(RecursiveForecast, PersistenceIsAFixedPoint) {
    Gen gen(1);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n_s = gen.index(1, 10);
        const auto w = gen.positive(n_s);
        const std::size_t n_p = gen.index(1, 8);
        const auto r = recursive_forecast(PersistenceForecaster(n_s), w, n_p);
        EXPECT_EQ(r.predictions, std::vector<double>(n_p, w.back()));
    }
}

TEST(RecursiveForecast, Errors) {
    try {
        (void)recursive_forecast(PlusOne(3), std::vector{1.0, 2.0}, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::WindowLengthMismatch);
    }
    EXPECT_THROW((void)recursive_forecast(PlusOne(1), std::vector{1.0}, 0), Error);
    try {
        (void)recursive_forecast(NanAfterFirst(), std::vector{1.0, 2.0}, 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NumericalDivergence);
    }
}

TEST(RecursiveForecast, UsesAnchoredForecaster) {
    const auto r = recursive_forecast(AnchoredStub(), std::vector{1.0, 2.0}, 2);
    EXPECT_EQ(r.predictions, (std::vector<double>{3, 4}));
}

TEST(RecursiveForecast, FirstPredictionIndependentOfHorizon) {
    Gen gen(2);
    for (int trial = 0; trial < 50; ++trial) {
        const auto w = gen.positive(4);
        const double first = recursive_forecast(Blend(4), w, 1).predictions[0];
        for (std::size_t n_p = 2; n_p <= 6; ++n_p) {
            EXPECT_EQ(recursive_forecast(Blend(4), w, n_p).predictions[0], first);
        }
    }
}

TEST(RecursiveForecast, Composability) {
    Gen gen(3);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n_s = gen.index(1, 8);
        const auto w = gen.positive(n_s);
        const std::size_t a = gen.index(1, 5);
        const std::size_t b = gen.index(1, 5);
        const PlusOne plus(n_s);
        const Blend blend(n_s);
        for (const Forecaster* f : {static_cast<const Forecaster*>(&plus),
                                    static_cast<const Forecaster*>(&blend)}) {
            const auto whole = recursive_forecast(*f, w, a + b).predictions;
            const auto head = recursive_forecast(*f, w, a).predictions;
            std::vector<double> shifted(w.begin(), w.end());
            shifted.insert(shifted.end(), head.begin(), head.end());
            shifted.erase(shifted.begin(), shifted.end() - static_cast<std::ptrdiff_t>(n_s));
            const auto tail = recursive_forecast(*f, shifted, b).predictions;
            std::vector<double> joined = head;
            joined.insert(joined.end(), tail.begin(), tail.end());
            EXPECT_EQ(joined, whole);
        }
    }
}

TEST(Evaluate, PerfectOracleScoresZero) {
    const auto series = strictly_increasing(40);
    const auto test = make_windows(series, 5, 3);
    const auto ev = evaluate(Oracle(series, 5), test, 3);
    EXPECT_EQ(ev.kmape.percent, 0.0);
    EXPECT_EQ(ev.kmdsa.percent, 0.0);
    EXPECT_EQ(ev.raw.sequences(), test.size());
    EXPECT_EQ(ev.raw.horizon(), 3u);
    EXPECT_EQ(ev.forecasts.back().source_window_end, test.back().window_end_index);
}

TEST(Evaluate, PersistenceErrorGrowsWithHorizon) {
    const auto series = strictly_increasing(40);
    const auto test = make_windows(series, 4, 5);
    double previous = -1.0;
    for (std::size_t n_p = 1; n_p <= 5; ++n_p) {
        const auto ev = evaluate(PersistenceForecaster(4), test, n_p);
        // hand-computed: mean over steps i and samples of (x_{t+i} - x_t) / x_{t+i}
        double expected = 0.0;
        for (std::size_t i = 0; i < n_p; ++i) {
            double step = 0.0;
            for (const auto& s : test) step += (s.targets[i] - s.inputs.back()) / s.targets[i];
            expected += 100.0 * step / static_cast<double>(test.size());
        }
        expected /= static_cast<double>(n_p);
        EXPECT_NEAR(ev.kmape.percent, expected, 1e-9);
        EXPECT_GT(ev.kmape.percent, previous);
        previous = ev.kmape.percent;
    }
}

TEST(Evaluate, SingleStepEqualsPlainMetrics) {
    Gen gen(4);
    const auto series = epicast::testing::growth_series(gen, 30);
    const auto test = make_windows(std::span(series).subspan(0, 19), 8, 1);
    ASSERT_EQ(test.size(), 11u);
    const std::vector<WindowSample> ten(test.begin() + 1, test.end());
    const auto ev = evaluate(Blend(8), ten, 1);
    std::vector<double> actual;
    std::vector<double> predicted;
    for (const auto& s : ten) {
        actual.push_back(s.targets[0]);
        predicted.push_back(Blend(8).predict_next(s.inputs));
    }
    EXPECT_EQ(ev.kmape.percent, mape(actual, predicted).percent);
    EXPECT_EQ(ev.kmdsa.percent, mdsa(actual, predicted).percent);
}

TEST(Evaluate, SkipsSamplesWithShortTargets) {
    std::vector<WindowSample> test{{{1, 2}, {3, 4, 5}, 1}, {{2, 3}, {4}, 2}, {{3, 4}, {5, 6, 7}, 3}};
    const auto ev = evaluate(PlusOne(2), test, 3);
    EXPECT_EQ(ev.raw.sequences(), 2u);
    EXPECT_EQ(ev.kmape.percent, 0.0);
    EXPECT_EQ(forecast_all(PlusOne(2), test, 3).size(), 2u);
    EXPECT_THROW((void)evaluate(PlusOne(2), test, 4), Error);
}

TEST(Evaluate, Deterministic) {
    Gen gen(5);
    const auto series = epicast::testing::growth_series(gen, 40);
    const auto test = make_windows(series, 6, 5);
    const auto a = evaluate(Blend(6), test, 5);
    const auto b = evaluate(Blend(6), test, 5);
    EXPECT_EQ(a.kmape, b.kmape);
    EXPECT_EQ(a.kmdsa, b.kmdsa);
    EXPECT_EQ(a.raw.predicted_rows(), b.raw.predicted_rows());
}
