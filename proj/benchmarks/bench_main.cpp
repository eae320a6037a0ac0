// Microbenchmarks for the hot paths: eigendecomposition, shifting
// action, pairing evaluation and the full balance sweep.

#include <benchmark/benchmark.h>

#include "qgauge/gauge.hpp"
#include "qgauge/random.hpp"
#include "qgauge/sum_rules.hpp"
#include "qgauge/system.hpp"
#include "qgauge/thermal.hpp"

namespace {

using namespace qgauge;

ManyBodySystem oscillator_system(int n_max) {
  BasisSpec spec;
  OscillatorSpec osc;
  osc.n_max = n_max;
  spec.kind = osc;
  SystemOptions opt;
  opt.v_ext = harmonic_potential(spec.constants, 1.0);
  return build_many_body(spec, 1, Statistics::distinguishable, opt);
}

void BM_spectral_decompose(benchmark::State& state) {
  const Index dim = state.range(0);
  const OperatorMatrix h = random_hermitian(dim, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectral_decompose(h));
  }
}
BENCHMARK(BM_spectral_decompose)->Arg(32)->Arg(81)->Arg(162);

void BM_sigma_apply(benchmark::State& state) {
  const ManyBodySystem sys = oscillator_system(static_cast<int>(state.range(0)));
  const OperatorMatrix a = sys.sum_x();
  const double r = sys.eval_points()[sys.eval_points().size() / 3];
  for (auto _ : state) {
    benchmark::DoNotOptimize(sigma_apply(sys, r, a));
  }
}
BENCHMARK(BM_sigma_apply)->Arg(40)->Arg(80);

void BM_mori_product(benchmark::State& state) {
  const ManyBodySystem sys = oscillator_system(static_cast<int>(state.range(0)));
  const ThermalState st = make_thermal_state(sys, 1.0);
  const OperatorMatrix a = sys.sum_x();
  const OperatorMatrix b = sys.hamiltonian();
  for (auto _ : state) {
    benchmark::DoNotOptimize(mori_product(st, a, b));
  }
}
BENCHMARK(BM_mori_product)->Arg(40)->Arg(80);

void BM_force_balance_sweep(benchmark::State& state) {
  const ManyBodySystem sys = oscillator_system(static_cast<int>(state.range(0)));
  const ThermalState st = make_thermal_state(sys, 2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_force_balance(st));
  }
}
BENCHMARK(BM_force_balance_sweep)->Arg(40)->Arg(80);

}  // namespace

BENCHMARK_MAIN();
