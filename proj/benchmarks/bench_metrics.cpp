#include <benchmark/benchmark.h>

#include <random>

#include "epicast/metrics.hpp"

namespace {

std::vector<std::vector<double>> random_rows(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(100.0, 1e5);
    std::vector<std::vector<double>> out(rows, std::vector<double>(cols));
    for (auto& r : out) {
        for (auto& v : r) v = dist(rng);
    }
    return out;
}

void BM_Mape(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = random_rows(1, n, 1).front();
    const auto p = random_rows(1, n, 2).front();
    for (auto _ : state) benchmark::DoNotOptimize(epicast::mape(a, p));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Mape)->Arg(10)->Arg(1000)->Arg(100000);

void BM_Mdsa(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = random_rows(1, n, 3).front();
    const auto p = random_rows(1, n, 4).front();
    for (auto _ : state) benchmark::DoNotOptimize(epicast::mdsa(a, p));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Mdsa)->Arg(10)->Arg(1000)->Arg(100000);

void BM_KPeriod(benchmark::State& state) {
    const auto k = static_cast<std::size_t>(state.range(0));
    const epicast::HorizonPredictions h(random_rows(1000, k, 5), random_rows(1000, k, 6));
    for (auto _ : state) {
        benchmark::DoNotOptimize(epicast::kmape(h));
        benchmark::DoNotOptimize(epicast::kmdsa(h));
    }
}
BENCHMARK(BM_KPeriod)->Arg(1)->Arg(5);

}  // namespace

BENCHMARK_MAIN();
