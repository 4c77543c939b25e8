#include <benchmark/benchmark.h>

#include "mppic/cases.hpp"
#include "mppic/config.hpp"
#include "mppic/drag.hpp"
#include "mppic/eulerian.hpp"
#include "mppic/parcels.hpp"
#include "mppic/scheduler.hpp"

using namespace mppic;

namespace {

const SimulationSetup& desk() {
  static const SimulationSetup sim = [] {
    RunConfig c = desk_bed_config();
    c.output.dir.clear();
    return make_simulation(c);
  }();
  return sim;
}

void BM_Deposit(benchmark::State& state) {
  const SimulationSetup& sim = desk();
  for (auto _ : state) benchmark::DoNotOptimize(deposit(sim.initial.parcels, sim.setup.mesh));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(sim.initial.parcels.size()));
}
BENCHMARK(BM_Deposit)->Unit(benchmark::kMillisecond);

void BM_DragAndCoupling(benchmark::State& state) {
  const SimulationSetup& sim = desk();
  const GridSpec& g = sim.setup.mesh.grid;
  for (auto _ : state) {
    const ParcelDrag d = compute_parcel_drag(sim.initial.parcels, sim.initial.fields, g, sim.setup.gas);
    benchmark::DoNotOptimize(accumulate_F(sim.initial.parcels, d, sim.initial.fields, g));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(sim.initial.parcels.size()));
}
BENCHMARK(BM_DragAndCoupling)->Unit(benchmark::kMillisecond);

void BM_MomentumAssembly(benchmark::State& state) {
  const SimulationSetup& sim = desk();
  const MomentumInputs in{sim.initial.fields, sim.initial.fields, nullptr};
  for (auto _ : state)
    benchmark::DoNotOptimize(assemble_momentum(2, in, 1e-3, sim.setup.gas, sim.setup.mesh, 0.7));
}
BENCHMARK(BM_MomentumAssembly)->Unit(benchmark::kMicrosecond);

void BM_PressureSolve(benchmark::State& state) {
  const SimulationSetup& sim = desk();
  const MomentumInputs in{sim.initial.fields, sim.initial.fields, nullptr};
  std::array<EquationSystem, 3> mom;
  for (int a = 0; a < 3; ++a) mom[a] = assemble_momentum(a, in, 1e-3, sim.setup.gas, sim.setup.mesh, 0.7);
  const EquationSystem pp = assemble_pressure_correction(sim.initial.fields, {&mom[0], &mom[1], &mom[2]},
                                                         sim.initial.fields.eps_g, 1e-3, sim.setup.gas,
                                                         sim.setup.mesh);
  for (auto _ : state) {
    EquationSystem sys = pp;
    benchmark::DoNotOptimize(solve_bicgstab(sys, 1e-6, 500));
  }
}
BENCHMARK(BM_PressureSolve)->Unit(benchmark::kMillisecond);

void BM_DeskBedStep(benchmark::State& state) {
  const SimulationSetup& sim = desk();
  const char* devices = state.range(0) == 1 ? "111[1]" : "234[1234]";
  StepRunner runner(sim.setup, parse_assignment(devices), CouplingMode::Explicit, sim.simple);
  for (auto _ : state) {
    SimState st = sim.initial;
    benchmark::DoNotOptimize(runner.attempt_step(st, 1e-3, true));
  }
  state.SetLabel(devices);
}
BENCHMARK(BM_DeskBedStep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
