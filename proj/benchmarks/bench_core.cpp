#include <benchmark/benchmark.h>

#include <vector>

#include "rabiflux/chain.hpp"
#include "rabiflux/esr_synth.hpp"
#include "rabiflux/fluxon.hpp"
#include "rabiflux/jcm.hpp"
#include "rabiflux/spectro_analysis.hpp"

using namespace rabiflux;

static void BM_JcmInversion(benchmark::State& state) {
  const auto field = jcm::CoherentFieldState::coherent(static_cast<double>(state.range(0)));
  std::vector<double> t;
  for (int i = 0; i <= 6000; ++i) t.push_back(0.01 * i);
  for (auto _ : state) benchmark::DoNotOptimize(jcm::inversion_trace(field, {1.0, 0.0}, t));
}
BENCHMARK(BM_JcmInversion)->Arg(10)->Arg(50)->Arg(200);

static void BM_ChainStep(benchmark::State& state) {
  chain::ChainParams p;
  p.site_count = static_cast<int>(state.range(0));
  p.omega0 = p.omega = 1.0;
  p.k = 0.1;
  p.xi1 = -1.0;
  p.xi2 = 1.0;
  p.g = 1.0;
  p.n_max = 9;
  const chain::GaussianBeam beam{1.0, 10.0, 8.0, chain::Level::kExcited};
  const auto w = chain::coherent_weights(3.0, 0, 9);
  const auto f = chain::init_gaussian_beam(p, std::span(&beam, 1), w);
  for (auto _ : state) benchmark::DoNotOptimize(chain::integrate(f, p, 0.1, 1e-3));
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_ChainStep)->Arg(64)->Arg(256);

static void BM_FluxonStep(benchmark::State& state) {
  fluxon::JunctionParams p;
  p.alpha = 0.05;
  p.gamma = 0.2;
  p.grid_points = static_cast<int>(state.range(0));
  p.dt = 0.5 * p.dx();
  auto s = fluxon::init_kink(p, 10.0, 0.0);
  for (auto _ : state) s = fluxon::step_pde(std::move(s), p, 100);
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_FluxonStep)->Arg(1000)->Arg(2000);

static void BM_SynthAndAnalyze(benchmark::State& state) {
  esr::ComposeInput in;
  in.sweep.field_start = 3322.3;
  in.sweep.field_end = 3323.8;
  in.sweep.sweep_rate = 2.0 / 480;
  in.sweep.samples = 15001;
  esr::OscillationPacketSpec pk;
  pk.coupling_g = 0.0782436;
  pk.nbar = 194.364;
  pk.center_field = 3322.80822;
  in.packets.push_back(pk);
  for (auto _ : state) {
    const auto s = esr::compose_spectrum(in).spectrum;
    benchmark::DoNotOptimize(analysis::analyze_spectrum(s, {}));
  }
}
BENCHMARK(BM_SynthAndAnalyze);

BENCHMARK_MAIN();
