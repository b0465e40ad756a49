#include <benchmark/benchmark.h>

#include <random>

#include "epicast/neural/network.hpp"

namespace {

using epicast::neural::Architecture;

std::vector<epicast::neural::TrainingExample> batch(std::size_t n_s, std::size_t count) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> growth(1.0, 1.1);
    std::vector<epicast::neural::TrainingExample> out;
    for (std::size_t b = 0; b < count; ++b) {
        epicast::neural::TrainingExample ex;
        double level = 1000.0;
        for (std::size_t t = 0; t < n_s; ++t) {
            ex.window.push_back(level);
            level *= growth(rng);
        }
        ex.target = level;
        out.push_back(std::move(ex));
    }
    return out;
}

Architecture arch(std::int64_t i) { return static_cast<Architecture>(i); }

void BM_Forward(benchmark::State& state) {
    const auto config = epicast::neural::NetworkConfig::for_architecture(arch(state.range(0)), 15);
    const auto model = epicast::neural::initialize_model(config);
    const auto window = batch(15, 1).front().window;
    for (auto _ : state) benchmark::DoNotOptimize(epicast::neural::model_forward(model, window));
    state.SetLabel(std::string(epicast::neural::to_string(config.architecture)));
}

// One training epoch's worth of work: forward and backward over a 60-window batch.
void BM_Backward(benchmark::State& state) {
    const auto config = epicast::neural::NetworkConfig::for_architecture(arch(state.range(0)), 15);
    const auto model = epicast::neural::initialize_model(config);
    const auto examples = batch(15, 60);
    for (auto _ : state) benchmark::DoNotOptimize(epicast::neural::backward(model, examples));
    state.SetLabel(std::string(epicast::neural::to_string(config.architecture)));
}

BENCHMARK(BM_Forward)->DenseRange(0, 4)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Backward)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
