// Serial vs OpenMP sweep over independent closed-loop runs, plus a single
// N=24 controller step. Thread count follows OMP_NUM_THREADS.

#include "bess/sim.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>
#include <spdlog/spdlog.h>

#include <vector>

namespace {

constexpr double kSlot = 5.0 / 60.0;

std::vector<bess::SweepCase> make_cases(int count, int slots) {
  std::vector<bess::SweepCase> cases;
  for (int i = 0; i < count; ++i) {
    const int horizon = 24;
    const double amplitude = 0.1 + 0.4 * i / std::max(1, count - 1);
    const Eigen::Index n = slots + horizon - 1;
    bess::SweepCase c{{bess::gaussian_peak_profile({50.0, amplitude, 17.0, 4.0}, 13.0, n, kSlot),
                       {13.0, kSlot, bess::Vec::Zero(n)}},
                      bess::ControllerConfig::with_constant_weights(horizon, 1.0, 5.0, 1.0),
                      6.0,
                      {}};
    c.opts.duration_slots = slots;
    cases.push_back(std::move(c));
  }
  return cases;
}

void BM_SweepSerial(benchmark::State& state) {
  const auto cases = make_cases(static_cast<int>(state.range(0)), 48);
  for (auto _ : state) benchmark::DoNotOptimize(bess::run_sweep_serial(cases));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SweepParallel(benchmark::State& state) {
  const auto cases = make_cases(static_cast<int>(state.range(0)), 48);
  for (auto _ : state) benchmark::DoNotOptimize(bess::run_sweep_parallel(cases));
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = omp_get_max_threads();
}

void BM_MpcStepN24(benchmark::State& state) {
  const auto cfg = bess::ControllerConfig::with_constant_weights(24, 1.0, 5.0, 1.0);
  const auto load = bess::gaussian_peak_profile({50.0, 0.5, 17.0, 4.0}, 16.0, 24, kSlot);
  const bess::HorizonForecast fc{load.values, bess::Vec::Zero(24)};
  for (auto _ : state) benchmark::DoNotOptimize(bess::mpc_step(3.0, fc, cfg));
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MpcStepN24)->Unit(benchmark::kMicrosecond);

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
