// Serial vs OpenMP sweeps of the doublet response and the noise spectrum.

#include "tsr/cavity.hpp"
#include "tsr/noise.hpp"

#include <benchmark/benchmark.h>

#include <numbers>

using namespace tsr;

namespace {

CavityChain doublet_chain() {
  const double t = coupling_transmission_ideal(kTwoPi * 1000.0, 1200.0);
  return CavityChain::twin(1200.0, 1200.0, MirrorSpec::lossless_reflectivity(0.963),
                           MirrorSpec::lossless_transmission(t), MirrorSpec::lossless_reflectivity(0.99995));
}

TwinSR noise_topology() {
  const double t = coupling_transmission_ideal(kTwoPi * 1000.0, 1200.0);
  return {1200.0, 1200.0, MirrorSpec::lossless_transmission(t), MirrorSpec::lossless_reflectivity(0.963)};
}

void doublet(benchmark::State& state, sweep::Execution exec) {
  const auto chain = doublet_chain();
  const auto grid = sweep::make_grid(-3000.0, 3000.0, static_cast<std::size_t>(state.range(0)),
                                     sweep::Spacing::Linear);
  for (auto _ : state) {
    benchmark::DoNotOptimize(doublet_response(chain, grid, DoubletObservable::InputCavityPower, exec));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void nsd(benchmark::State& state, sweep::Execution exec) {
  InterferometerParams p;
  p.arm_mirror_bounces = {2, 1};
  const Topology t = noise_topology();
  const auto grid = sweep::make_grid(10.0, 5000.0, static_cast<std::size_t>(state.range(0)), sweep::Spacing::Log);
  SpectrumOptions options;
  options.exec = exec;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        noise_spectral_density(t, p, SqueezedInput::vacuum(), HomodyneReadout(std::numbers::pi / 2.0), grid, options));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_DoubletSerial(benchmark::State& s) { doublet(s, sweep::Execution::Serial); }
void BM_DoubletParallel(benchmark::State& s) { doublet(s, sweep::Execution::Parallel); }
void BM_NsdSerial(benchmark::State& s) { nsd(s, sweep::Execution::Serial); }
void BM_NsdParallel(benchmark::State& s) { nsd(s, sweep::Execution::Parallel); }

}  // namespace

BENCHMARK(BM_DoubletSerial)->Arg(6001)->Arg(60001)->UseRealTime();
BENCHMARK(BM_DoubletParallel)->Arg(6001)->Arg(60001)->UseRealTime();
BENCHMARK(BM_NsdSerial)->Arg(600)->Arg(6000)->UseRealTime();
BENCHMARK(BM_NsdParallel)->Arg(600)->Arg(6000)->UseRealTime();

BENCHMARK_MAIN();
