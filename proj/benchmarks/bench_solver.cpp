#include <benchmark/benchmark.h>

#include <cmath>

#include "nir3/constants.hpp"
#include "nir3/solver.hpp"

using namespace nir3;

namespace {

void BM_ZonalNewton(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const AmbientPolynomial K = AmbientPolynomial::parse("x4 + 2");
  HarmonicSpectrum v0 = HarmonicSpectrum::zonal_zeros(L, SpherePoint::axis(3));
  v0.coeffs[0] = std::sqrt(kVolS3) * 0.25;
  for (auto _ : state) {
    benchmark::DoNotOptimize(axisym_solve(K, SpherePoint::axis(3), 0.3, v0));
  }
}

void BM_FullNewtonGMRES(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const AmbientPolynomial K = AmbientPolynomial::parse("x4 + 2");
  HarmonicSpectrum v0 = HarmonicSpectrum::zeros(L);
  v0.coeffs[0] = std::sqrt(kVolS3) * 0.5;
  SolverOptions opts;
  opts.force_iterative = true;
  for (auto _ : state) {
    benchmark::DoNotOptimize(newton_solve(v0, 0.3, K, opts));
  }
}

void BM_RatePotential(benchmark::State& state) {
  const AmbientPolynomial K = AmbientPolynomial::parse("x4 + 2");
  std::vector<CriticalPointRecord> km;
  for (const CriticalPointRecord& r : find_critical_points(K, 300, 0)) {
    if (r.cls == CriticalClass::kMinus) km.push_back(r);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_F_critical(km, K, 0.01));
  }
}

}  // namespace

BENCHMARK(BM_ZonalNewton)->Arg(256)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FullNewtonGMRES)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RatePotential)->Unit(benchmark::kMicrosecond);
