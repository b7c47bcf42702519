#include <benchmark/benchmark.h>

#include <string>

#include "mgsim/scenario_io.hpp"
#include "mgsim/sweep.hpp"

using namespace mgsim;

namespace {

// Case 3 style grid: three variants x two scales, shortened horizon.
std::vector<SweepCell> grid(double horizon) {
    auto s = load_scenario(std::string(MGSIM_SCENARIO_DIR) + "/case3.json");
    s.horizon = horizon;
    return build_cells({{"case3", s}}, {},
                       {ControllerVariant::Proposed, ControllerVariant::FiniteBaseline,
                        ControllerVariant::AsymptoticBaseline},
                       {1.0, 10.0});
}

void BM_SweepSerial(benchmark::State& state) {
    const auto cells = grid(static_cast<double>(state.range(0)) / 10.0);
    for (auto _ : state) benchmark::DoNotOptimize(run_sweep_serial(cells));
}

void BM_SweepParallel(benchmark::State& state) {
    const auto cells = grid(static_cast<double>(state.range(0)) / 10.0);
    for (auto _ : state) benchmark::DoNotOptimize(run_sweep_parallel(cells));
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepParallel)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
