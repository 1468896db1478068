#include <bangbang/optimizer.hpp>
#include <bangbang/propagator.hpp>
#include <benchmark/benchmark.h>

using namespace bangbang;

namespace {

// (side, occupants) giving d = 6, 36, 126.
XxzSystem system_for(int64_t d) {
  if (d == 6) return XxzSystem({2, Boundary::open}, 2);
  if (d == 36) return XxzSystem({3, Boundary::open}, 2);
  return XxzSystem({3, Boundary::open}, 4);
}

void SegmentApply(benchmark::State& state) {
  const XxzSystem sys = system_for(state.range(0));
  const ControlSpectra spectra(sys);
  Vector psi = sys.ground_state(CouplingRatio::from_log(0.3)).state;
  Vector scratch(psi.size());
  std::size_t k = 0;
  for (auto _ : state) {
    spectra.apply(kActiveBangs[k++ % 3], 0.01, psi, scratch);
    benchmark::DoNotOptimize(psi.data());
  }
  state.counters["d"] = static_cast<double>(sys.dim());
}
BENCHMARK(SegmentApply)->Arg(6)->Arg(36)->Arg(126);

void DbmcMove(benchmark::State& state) {
  const XxzSystem sys = system_for(state.range(0));
  const ControlSpectra spectra(sys);
  const Vector psi = sys.ground_state(CouplingRatio::from_log(-1.5)).state;
  const Vector target = sys.ground_state(CouplingRatio::from_log(1.5)).state;
  const Objective obj = Objective::state_distance(psi, target);
  const UnitaryCache cache(spectra, 0.5, 64, 64);
  Rng rng(1);
  std::vector<Bang> bangs(64);
  for (Bang& b : bangs) b = kActiveBangs[rng.index(3)];
  IncrementalEvolver ev(cache, psi, bangs);
  for (auto _ : state) {
    const std::size_t idx = rng.index(64);
    benchmark::DoNotOptimize(obj(ev.propose(idx, kActiveBangs[rng.index(3)])));
  }
}
BENCHMARK(DbmcMove)->Arg(6)->Arg(36)->Arg(126);

void ContinuousEvolution(benchmark::State& state) {
  const XxzSystem sys = system_for(state.range(0));
  const ControlSpectra spectra(sys);
  const Vector psi = sys.ground_state(CouplingRatio::from_log(-1.5)).state;
  const JumpProtocol p{1.0, {true, {0.1, 0.3, 0.5, 0.7}}, {false, {0.2, 0.4, 0.6, 0.8}}};
  for (auto _ : state) benchmark::DoNotOptimize(evolve_continuous(psi, p, spectra).data());
}
BENCHMARK(ContinuousEvolution)->Arg(6)->Arg(36)->Arg(126);

}  // namespace

BENCHMARK_MAIN();
