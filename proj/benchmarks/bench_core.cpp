#include <benchmark/benchmark.h>

#include "maxqed/green1d.hpp"
#include "maxqed/materials.hpp"
#include "maxqed/tdsim.hpp"

using namespace maxqed;

namespace {

const UnitsSystem kNatural = UnitsSystem::natural();
const MaterialModel kLorentz({{1.0, 1.0, 0.1}}, {});

void BM_KKReconstruct(benchmark::State& state) {
  const auto grid = kk_grid(kLorentz);
  const auto samples = sample_epsilon_imag(kLorentz, grid);
  double w = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kk_reconstruct(samples, w));
    w = w < 3.0 ? w + 0.01 : 0.5;
  }
}
BENCHMARK(BM_KKReconstruct);

void BM_GreenSolve(benchmark::State& state) {
  const LayerStack slab = LayerStack::slab(kLorentz, 2.0);
  const double h = 2.0 / static_cast<double>(state.range(0));
  const Grid1D grid = Grid1D::covering(slab, h, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_green(slab, 1.0, grid, kNatural));
  state.counters["nodes"] = static_cast<double>(grid.size());
}
BENCHMARK(BM_GreenSolve)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_TdStep(benchmark::State& state) {
  const LayerStack slab = LayerStack::slab(kLorentz, 2.0);
  const Grid1D grid = Grid1D::covering(slab, 0.05, 4.0);
  tdsim::ReservoirOptions options;
  options.modes = static_cast<std::size_t>(state.range(0));
  const auto system = tdsim::System::from_stack(slab, grid, kNatural, options);
  tdsim::PulseParams pulse;
  pulse.center = -2.5;
  pulse.width = 0.2;
  auto s = system.init_pulse(pulse);
  const double dt = system.max_stable_dt();
  for (auto _ : state) system.step(s, dt);
}
BENCHMARK(BM_TdStep)->Arg(50)->Arg(200);

}  // namespace
BENCHMARK_MAIN();
