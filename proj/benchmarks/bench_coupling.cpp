#include <benchmark/benchmark.h>

#include "mts/baselines.hpp"
#include "mts/diagnostics.hpp"
#include "mts/problems.hpp"

namespace {

using namespace mts;

void step_scenario(benchmark::State& state, const Scenario& s) {
  const CoupledSystem sys = s.make_system();
  for (auto _ : state) benchmark::DoNotOptimize(advance_system_step(sys));
  state.counters["unknowns"] = static_cast<double>(sys.kinematic_unknowns());
}

void BM_StepSdof3(benchmark::State& state) { step_scenario(state, build_sdof3()); }
BENCHMARK(BM_StepSdof3);

void BM_StepBar(benchmark::State& state) {
  Scenario s = build_bar_1d();
  s.set_eta(1, static_cast<int>(state.range(0)));
  step_scenario(state, s);
}
BENCHMARK(BM_StepBar)->Arg(10)->Arg(100)->Arg(1000);

void BM_StepPlate(benchmark::State& state) {
  Scenario s = build_plate_2d();
  const int k = static_cast<int>(state.range(0));
  for (std::size_t i = 0; i < 3; ++i) s.set_eta(i, 5 * k);
  s.set_eta(3, k);
  step_scenario(state, s);
}
BENCHMARK(BM_StepPlate)->Arg(1)->Arg(2)->Arg(4);

void BM_StepPlateSolver(benchmark::State& state) {
  Scenario s = build_plate_2d();
  s.options.solver = state.range(0) == 0 ? SaddleSolver::monolithic : SaddleSolver::schur_complement;
  step_scenario(state, s);
}
BENCHMARK(BM_StepPlateSolver)->Arg(0)->Arg(1);

void BM_StepWave(benchmark::State& state) { step_scenario(state, build_wave_2d()); }
BENCHMARK(BM_StepWave)->Unit(benchmark::kMillisecond);

void BM_BackwardEulerBar(benchmark::State& state) {
  Scenario s = build_bar_1d();
  s.set_eta(1, 1);
  for (std::size_t i = 0; i < s.subdomains.size(); ++i) s.set_newmark(i, NewmarkParams::average_acceleration());
  const CoupledSystem sys = s.make_system();
  const BackwardEulerSolver solver(sys);
  for (auto _ : state) benchmark::DoNotOptimize(solver.step(sys));
}
BENCHMARK(BM_BackwardEulerBar);

void BM_EnergyDiagnostics(benchmark::State& state) {
  const CoupledSystem sys = build_plate_2d().make_system();
  const SystemStepResult res = advance_system_step(sys);
  for (auto _ : state) benchmark::DoNotOptimize(make_step_report(res, sys));
}
BENCHMARK(BM_EnergyDiagnostics);

}  // namespace

BENCHMARK_MAIN();
