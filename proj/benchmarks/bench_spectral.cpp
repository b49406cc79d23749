#include <benchmark/benchmark.h>

#include "nir3/bubbles.hpp"
#include "nir3/spectral.hpp"

using namespace nir3;

namespace {

void BM_ForwardTransform(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  auto grid = QuadratureGrid::build_order(3 * L + 1);
  const BubbleParams b(SpherePoint::axis(3), 3.0);
  const SphericalField f = sample(grid, [&](const SpherePoint& p) { return eval_bubble(b, p); });
  forward_transform(f, L);  // warm the plan cache
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_transform(f, L));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid->size()));
}

void BM_InverseTransform(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  auto grid = QuadratureGrid::build_order(3 * L + 1);
  const BubbleParams b(SpherePoint::axis(3), 3.0);
  const HarmonicSpectrum s =
      forward_transform(sample(grid, [&](const SpherePoint& p) { return eval_bubble(b, p); }), L);
  for (auto _ : state) {
    benchmark::DoNotOptimize(inverse_transform(s, grid));
  }
}

void BM_InteractionQuadrature(benchmark::State& state) {
  const double t = static_cast<double>(state.range(0));
  const BubbleParams b1(SpherePoint::axis(3), t), b2(SpherePoint(1, 0, 0, 0), t);
  for (auto _ : state) {
    benchmark::DoNotOptimize(interaction_integral(b1, b2, 2.0, 1.0, 1e-8));
  }
}

}  // namespace

BENCHMARK(BM_ForwardTransform)->Arg(16)->Arg(24)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_InverseTransform)->Arg(16)->Arg(24)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_InteractionQuadrature)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);
