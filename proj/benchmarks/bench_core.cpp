#include <benchmark/benchmark.h>

#include <vector>

#include "qdswitch/lindblad.hpp"
#include "qdswitch/spectra.hpp"
#include "qdswitch/switching.hpp"

using namespace qdswitch;

namespace {

const DeviceParams kDevice = paper_defaults();

void BM_BuildLiouvillian(benchmark::State& state) {
  const HilbertDims dims(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_liouvillian(kDevice, dims, CoherentDrive{1.0, 0.0}));
  }
}
BENCHMARK(BM_BuildLiouvillian)->Arg(4)->Arg(8)->Arg(12)->Unit(benchmark::kMicrosecond);

void BM_SteadyState(benchmark::State& state) {
  const HilbertDims dims(static_cast<int>(state.range(0)));
  const Liouvillian l = build_liouvillian(kDevice, dims, CoherentDrive{1.0, 0.0});
  for (auto _ : state) benchmark::DoNotOptimize(steady_state(l));
}
BENCHMARK(BM_SteadyState)->Arg(4)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_RegressionSpectrum(benchmark::State& state) {
  CorrelationOptions opt;
  opt.n_fock = static_cast<int>(state.range(0));
  opt.pump.qd_rate = 0.2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(power_spectrum(two_time_correlation(kDevice, CoherentDrive{0.5, 0.0}, opt)));
  }
}
BENCHMARK(BM_RegressionSpectrum)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_PulsedEvolution(benchmark::State& state) {
  const HilbertDims dims(static_cast<int>(state.range(0)));
  const std::vector<DriveSpec> drives{pulse_with_energy(0.01, 0.0, 60.0, 0.0, 76.3),
                                      pulse_with_energy(2.0, -12.2, 80.0, 0.0, 76.3)};
  std::vector<double> grid;
  for (double t = -300.0; t <= 300.0; t += 2.0) grid.push_back(t);
  EvolveOptions opt;
  opt.stepper = state.range(1) ? Stepper::fixed : Stepper::adaptive;
  for (auto _ : state) {
    benchmark::DoNotOptimize(evolve(DensityMatrix::vacuum_ground(dims), kDevice, dims, drives, grid, opt));
  }
}
BENCHMARK(BM_PulsedEvolution)->Args({6, 0})->Args({6, 1})->Unit(benchmark::kMillisecond);

void BM_ScatterScan(benchmark::State& state) {
  std::vector<double> grid;
  for (int k = 0; k <= 1600; ++k) grid.push_back(-40.0 + 0.05 * k);
  for (auto _ : state) benchmark::DoNotOptimize(linear_response_scan(kDevice, grid));
}
BENCHMARK(BM_ScatterScan)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
