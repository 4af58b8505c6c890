#include <benchmark/benchmark.h>

#include "kwave/diagnostics.hpp"
#include "kwave/fixtures.hpp"
#include "kwave/spectral.hpp"
#include "kwave/transport.hpp"

using namespace kwave;

namespace {

GridSpec grid(int n, int lmax) {
  GridSpec g;
  g.n_r = n;
  g.lmax = lmax;
  return g;
}

void BM_SwshAnalyze(benchmark::State& state) {
  const int lmax = static_cast<int>(state.range(0));
  const HarmonicBasis basis(-2, 1, lmax);
  Eigen::VectorXcd samples = Eigen::VectorXcd::Random(basis.n_theta());
  for (auto _ : state) benchmark::DoNotOptimize(basis.analyze(samples));
}
BENCHMARK(BM_SwshAnalyze)->Arg(8)->Arg(32)->Arg(64);

void BM_Acceleration(benchmark::State& state) {
  const auto bg = make_background(1.0, 0.7);
  const TeukolskyOperator op(bg, grid(static_cast<int>(state.range(0)), 8), -2, 2);
  const EvolutionState st = gaussian_initial_data(op, InitialData{});
  for (auto _ : state) benchmark::DoNotOptimize(op.acceleration(st.psi.c, st.Pi.c));
  state.SetItemsProcessed(state.iterations() * op.n_r());
}
BENCHMARK(BM_Acceleration)->Arg(96)->Arg(200)->Arg(384);

void BM_Rk4Step(benchmark::State& state) {
  const auto bg = make_background(1.0, 0.7);
  const TeukolskyOperator op(bg, grid(200, 8), -2, 2);
  EvolutionState st = gaussian_initial_data(op, InitialData{});
  const double dt = op.stable_dt();
  for (auto _ : state) step(op, st, dt);
}
BENCHMARK(BM_Rk4Step);

void BM_SliceEnergy(benchmark::State& state) {
  const auto bg = make_background(1.0, 0.7);
  const TeukolskyOperator op(bg, grid(200, 8), -2, 2);
  const EvolutionState st = gaussian_initial_data(op, InitialData{});
  for (auto _ : state) benchmark::DoNotOptimize(slice_energy(op, st, 2));
}
BENCHMARK(BM_SliceEnergy);

void BM_IdentitySuite(benchmark::State& state) {
  IdentityOptions opt;
  opt.sample_count = static_cast<int>(state.range(0));
  opt.include_fixtures = false;
  for (auto _ : state) benchmark::DoNotOptimize(verify_identities(opt));
}
BENCHMARK(BM_IdentitySuite)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_TransportChain(benchmark::State& state) {
  const auto bg = make_background(1.0, 0.7);
  TransportGridSpec spec;
  spec.r_max = 14.0;
  spec.n_r = static_cast<int>(state.range(0));
  spec.lmax = 8;
  const FieldFixture fx = lin_mass_fixture(bg, 0.5);
  for (auto _ : state)
    benchmark::DoNotOptimize(integrate_chain(bg, ZeroSource(spec.lmax), fixture_initial_data(fx), spec));
}
BENCHMARK(BM_TransportChain)->Arg(40)->Arg(120)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
