#include <benchmark/benchmark.h>

#include <chrono>
#include <sstream>

#include "epicast/app/jhu_csv.hpp"

namespace {

// Roughly the shape of the real global file: ~270 rows, one column per day.
std::string synthetic_file(std::size_t rows, std::size_t days) {
    std::ostringstream out;
    out << "Province/State,Country/Region,Lat,Long";
    const std::chrono::sys_days start{std::chrono::year{2020} / 1 / 22};
    for (std::size_t d = 0; d < days; ++d) {
        const std::chrono::year_month_day ymd{start + std::chrono::days{static_cast<int>(d)}};
        out << ',' << static_cast<unsigned>(ymd.month()) << '/' << static_cast<unsigned>(ymd.day()) << '/'
            << static_cast<int>(ymd.year()) % 100;
    }
    out << '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        out << "Province " << r << ",\"Country " << r % 190 << "\",1.0,2.0";
        for (std::size_t d = 0; d < days; ++d) out << ',' << d * (r + 1);
        out << '\n';
    }
    return out.str();
}

void BM_ParseCountry(benchmark::State& state) {
    const auto text = synthetic_file(270, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        std::istringstream in(text);
        benchmark::DoNotOptimize(epicast::app::parse_jhu_csv(in, "Country 7"));
    }
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseCountry)->Arg(125)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
