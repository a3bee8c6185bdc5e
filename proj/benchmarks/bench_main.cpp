#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "helios/density.hpp"
#include "helios/integrate.hpp"
#include "helios/numerics.hpp"
#include "helios/transport.hpp"
#include "helios/wigner.hpp"

namespace {

using namespace helios;

const Box kBox{Vec3(-4, -4, -4), Vec3(4, 4, 4)};
constexpr double kPeriod = 2.0 * std::numbers::pi;

RefractiveIndexField fisheye() { return RefractiveIndexField::fisheye(2.0, 1.0, kBox); }

PhasePoint launch(const RefractiveIndexField& f) {
  const Vec3 q(0.5, 0, 0);
  return PhasePoint{q, f.n(q) * Vec3::UnitY()};
}

void BM_MidpointStep(benchmark::State& state) {
  const auto f = fisheye();
  IntegratorConfig cfg;
  cfg.dt = kPeriod / 1000;
  PhasePoint z = launch(f);
  for (auto _ : state) {
    z = step(f, cfg, z, cfg.dt);
    benchmark::DoNotOptimize(z);
  }
}
BENCHMARK(BM_MidpointStep);

void BM_Rk4Step(benchmark::State& state) {
  const auto f = fisheye();
  IntegratorConfig cfg;
  cfg.scheme = Scheme::rk4;
  cfg.dt = kPeriod / 1000;
  PhasePoint z = launch(f);
  for (auto _ : state) {
    z = step(f, cfg, z, cfg.dt);
    benchmark::DoNotOptimize(z);
  }
}
BENCHMARK(BM_Rk4Step);

void BM_FlowOnePeriod(benchmark::State& state) {
  const auto f = fisheye();
  IntegratorConfig cfg;
  cfg.dt = kPeriod / static_cast<double>(state.range(0));
  const PhasePoint z0 = launch(f);
  for (auto _ : state) {
    benchmark::DoNotOptimize(advance(f, cfg, z0, kPeriod));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FlowOnePeriod)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_DiscreteWigner(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  SampledField1D field;
  field.eps = 0.01;
  field.q_min = -2.0;
  field.dq = 4.0 / static_cast<double>(n);
  field.u.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double q = field.q(j);
    field.u[j] = std::exp(-q * q / 0.02) * std::polar(1.0, 0.5 * q / field.eps);
  }
  for (auto _ : state) benchmark::DoNotOptimize(discrete_wigner(field));
}
BENCHMARK(BM_DiscreteWigner)->RangeMultiplier(2)->Range(128, 1024)->Unit(benchmark::kMillisecond);

void BM_TransportEnsemble(benchmark::State& state) {
  const auto f = fisheye();
  IntegratorConfig cfg;
  cfg.dt = kPeriod / 500;
  ProductDensity d;
  d.spatial = GaussianSpatial{Vec3(0.5, 0, 0), 0.05};
  d.directions = VonMisesFisherDirections{Vec3::UnitY(), 50.0};
  d.shell = {1.0, 2.0};
  const Ensemble e = sample_ensemble(d, static_cast<std::size_t>(state.range(0)), 7);
  set_thread_count(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(transport_ensemble(f, cfg, e, 0.25 * kPeriod));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TransportEnsemble)->Args({256, 1})->Args({256, 4})->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
