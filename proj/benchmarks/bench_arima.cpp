#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "epicast/arima.hpp"
#include "epicast/forecast.hpp"

namespace {

std::vector<double> growth(std::size_t n) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> noise(0.9, 1.1);
    std::vector<double> out;
    double level = 150.0;
    for (std::size_t i = 0; i < n; ++i) {
        level += 40.0 * std::exp(0.03 * static_cast<double>(i)) * noise(rng);
        out.push_back(std::round(level));
    }
    return out;
}

void BM_FitArima122(benchmark::State& state) {
    const auto x = growth(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(epicast::arima::fit_arima(x, {1, 2, 2}));
}
BENCHMARK(BM_FitArima122)->Arg(15)->Arg(60)->Arg(500);

void BM_RecursiveForecast(benchmark::State& state) {
    const auto x = growth(15);
    const epicast::arima::ArimaForecaster f(15, {1, 2, 2});
    const auto n_p = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(epicast::recursive_forecast(f, x, n_p));
}
BENCHMARK(BM_RecursiveForecast)->Arg(1)->Arg(5);

void BM_GridSearch(benchmark::State& state) {
    const auto x = growth(80);
    for (auto _ : state) benchmark::DoNotOptimize(epicast::arima::grid_search_orders(x, 15, 10));
}
BENCHMARK(BM_GridSearch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
