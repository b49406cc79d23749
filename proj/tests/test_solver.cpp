#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "nir3/constants.hpp"
#include "nir3/solver.hpp"
#include "oracles.hpp"

using namespace nir3;

namespace {

AmbientPolynomial tilted() { return AmbientPolynomial::parse("x4 + 2"); }
AmbientPolynomial unit_K() { return AmbientPolynomial::constant(1.0); }

HarmonicSpectrum constant_full(int L, double value) {
  HarmonicSpectrum v = HarmonicSpectrum::zeros(L);
  v.coeffs[0] = std::sqrt(kVolS3) * value;
  return v;
}

HarmonicSpectrum constant_zonal(int L, double value) {
  HarmonicSpectrum v = HarmonicSpectrum::zonal_zeros(L, SpherePoint::axis(3));
  v.coeffs[0] = std::sqrt(kVolS3) * value;
  return v;
}

}  // namespace

TEST_CASE("residual closed cases") {
  // K = 1, v = 1: P v = 1 = K v^{2-tau}.
  const HarmonicSpectrum one = constant_full(8, 1.0);
  CHECK(residual(one, 0.3, unit_K()).l2_norm() < 1e-12);

  // v = 0 has zero residual (the trivial solution, rejected downstream).
  const HarmonicSpectrum zero = HarmonicSpectrum::zeros(8);
  CHECK(residual(zero, 0.3, unit_K()).l2_norm() == doctest::Approx(0.0));

  // K = 1, tau = 0: the bubble is an exact solution; spectrally tiny residual.
  const int L = 16;
  const HarmonicSpectrum b = zonal_to_full(bubble_zonal_spectrum(3.5, L));
  const HarmonicSpectrum r = residual(b, 0.0, unit_K());
  const HarmonicSpectrum b2 = apply_p_half(b);
  CHECK(r.l2_norm() / b2.l2_norm() < 1e-6);
}

TEST_CASE("zonal residual equals full residual on zonal data") {
  const int L = 12;
  const HarmonicSpectrum zb = bubble_zonal_spectrum(2.5, L);
  const HarmonicSpectrum rz = residual(zb, 0.4, tilted());
  const HarmonicSpectrum rf = residual(zonal_to_full(zb), 0.4, tilted());
  for (int l = 0; l <= L; ++l) {
    CHECK(rz.coeffs[l] == doctest::Approx(rf.coeffs[degree_offset(l)]).epsilon(1e-9));
  }
}

TEST_CASE("newton finds the constant solution for K = 1") {
  SolverState st = newton_solve(constant_full(8, 0.9), 0.5, unit_K());
  CHECK(st.converged);
  CHECK(st.positive);
  CHECK(st.v.coeffs[0] == doctest::Approx(std::sqrt(kVolS3)).epsilon(1e-9));
  for (std::size_t i = 1; i < st.v.coeffs.size(); ++i) CHECK(std::abs(st.v.coeffs[i]) < 1e-8);

  // Zonal route recovers the same.
  SolverState sz = axisym_solve(unit_K(), SpherePoint::axis(3), 0.5, constant_zonal(32, 0.9));
  CHECK(sz.converged);
  CHECK(sz.v.coeffs[0] == doctest::Approx(std::sqrt(kVolS3)).epsilon(1e-9));
}

TEST_CASE("newton on the tilted curvature (frozen regression)") {
  // tau = 0.5, constant seed K_mean^{-1/(1-tau)} = 2^{-2}.
  SolverState st = axisym_solve(tilted(), SpherePoint::axis(3), 0.5, constant_zonal(64, 0.25));
  CHECK(st.converged);
  CHECK(st.positive);
  CHECK(st.residual_norm <= 1e-9 * st.rhs_norm);
  const BlowupDiagnostics d = diagnostics(st, tilted(), 1);
  REQUIRE(!d.peaks.empty());
  // Frozen from a converged high-resolution run.
  CHECK(d.peaks[0].height == doctest::Approx(0.38490018).epsilon(1e-6));
  CHECK(geodesic_distance(d.peaks[0].location, SpherePoint::axis(3)) < 1e-9);
}

TEST_CASE("bubble-seeded full solve concentrates near the cal-K^- point") {
  const int L = 16;
  const double tau = 0.05;
  // Prediction-scale seed about e4.
  HarmonicSpectrum seed = zonal_to_full(bubble_zonal_spectrum(1.0 / std::sqrt(2.0 * tau), L));
  seed *= 1.0 / 3.0;
  SolverState st = newton_solve(seed, tau, tilted());
  CHECK(st.converged);
  CHECK(st.positive);
  const BlowupDiagnostics d = diagnostics(st, tilted(), 1);
  REQUIRE(!d.peaks.empty());
  CHECK(geodesic_distance(d.peaks[0].location, SpherePoint::axis(3)) < 0.1);
  CHECK(d.peaks[0].height > 1.0);
}

TEST_CASE("jacobian matches finite differences of the residual (slope >= 1.9)") {
  const int L = 8;
  const double tau = 0.35;
  HarmonicSpectrum v = constant_full(L, 0.8);
  HarmonicSpectrum w = test::random_spectrum(L, 61, 0.05);
  // Positive base state.
  v += test::random_spectrum(L, 62, 0.01);

  // J w via the residual difference at h and h/2.
  const auto jres = [&](double h) {
    HarmonicSpectrum vp = v, vm = v;
    for (std::size_t i = 0; i < v.coeffs.size(); ++i) {
      vp.coeffs[i] += h * w.coeffs[i];
      vm.coeffs[i] -= h * w.coeffs[i];
    }
    HarmonicSpectrum diff = residual(vp, tau, tilted());
    diff -= residual(vm, tau, tilted());
    diff *= 1.0 / (2.0 * h);
    return diff;
  };
  // Second-order FD at two resolutions; errors against the extrapolated limit
  // (Richardson) decay at O(h^2), so the pairwise deviations scale by 4.
  const HarmonicSpectrum j1 = jres(1e-3);
  const HarmonicSpectrum j2 = jres(5e-4);
  const HarmonicSpectrum j3 = jres(2.5e-4);
  double e1 = 0, e2 = 0;
  for (std::size_t i = 0; i < j1.coeffs.size(); ++i) {
    e1 = std::max(e1, std::abs(j1.coeffs[i] - j2.coeffs[i]));
    e2 = std::max(e2, std::abs(j2.coeffs[i] - j3.coeffs[i]));
  }
  CHECK(std::log2(e1 / e2) > 1.9);
}

TEST_CASE("energy stationarity at a converged state") {
  const int L = 10;
  const double tau = 0.4;
  SolverState st = newton_solve(constant_full(L, 0.5), tau, tilted());
  REQUIRE(st.converged);
  std::mt19937_64 rng(63);
  for (int i = 0; i < 50; ++i) {
    HarmonicSpectrum w = test::random_spectrum(L, 700 + i);
    const double pairing = energy_pairing(st.v, w, tau, tilted());
    const double scale = hsigma_norm(w) * std::max(1.0, st.rhs_norm);
    CHECK(std::abs(pairing) / scale < 1e-6);
  }
  // The energy itself is finite and the quadratic part dominates for v = 1.
  CHECK(std::isfinite(energy(st.v, tau, tilted())));
}

TEST_CASE("dense and iterative linear solvers agree") {
  const int L = 8;
  const double tau = 0.4;
  SolverOptions dense_opts;
  dense_opts.force_dense = true;
  SolverOptions iter_opts;
  iter_opts.force_iterative = true;
  const SolverState a = newton_solve(constant_full(L, 0.6), tau, tilted(), dense_opts);
  const SolverState b = newton_solve(constant_full(L, 0.6), tau, tilted(), iter_opts);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  HarmonicSpectrum diff = a.v;
  diff -= b.v;
  CHECK(diff.l2_norm() < 1e-7 * a.v.l2_norm());
}

TEST_CASE("rotation equivariance of solutions") {
  const int L = 10;
  const double tau = 0.3;
  const AmbientPolynomial K = tilted();
  const Rotation4 R = Rotation4::random(64);
  const AmbientPolynomial KR = K.rotated(R);

  const SolverState s1 = newton_solve(constant_full(L, 0.5), tau, K);
  const SolverState s2 = newton_solve(constant_full(L, 0.5), tau, KR);
  REQUIRE(s1.converged);
  REQUIRE(s2.converged);
  std::mt19937_64 rng(65);
  for (int i = 0; i < 25; ++i) {
    const SpherePoint p = test::random_point(rng);
    // KR(x) = K(R^T x) so v2(x) = v1(R^T x), i.e. v2(R p) = v1(p).
    CHECK(evaluate(s2.v, R.apply(p)) == doctest::Approx(evaluate(s1.v, p)).epsilon(1e-6));
  }
}

TEST_CASE("full-3D and zonal solves agree at tau = 0.2") {
  const int L = 16;
  const double tau = 0.2;
  const AmbientPolynomial K = tilted();
  const SolverState zf = newton_solve(constant_full(L, 0.5), tau, K);
  const SolverState zz = axisym_solve(K, SpherePoint::axis(3), tau, constant_zonal(L, 0.5));
  REQUIRE(zf.converged);
  REQUIRE(zz.converged);
  // Same Galerkin space restricted to the zonal sector: compare in L2.
  const HarmonicSpectrum full_of_zonal = zonal_to_full(zz.v);
  HarmonicSpectrum diff = zf.v;
  diff -= full_of_zonal;
  CHECK(diff.l2_norm() < 1e-6);
}

TEST_CASE("axisym_solve rejects non-zonal curvature") {
  const AmbientPolynomial K = AmbientPolynomial::parse("x1 + 2");
  CHECK_THROWS_AS(axisym_solve(K, SpherePoint::axis(3), 0.3, constant_zonal(16, 0.5)),
                  std::invalid_argument);
}

TEST_CASE("diagnostics of an exact bubble") {
  const int L = 64;
  const double t = 8.0;
  SolverState st;
  st.tau = 0.05;
  st.L = L;
  st.v = bubble_zonal_spectrum(t, L);
  st.converged = true;
  st.positive = true;
  const BlowupDiagnostics d = diagnostics(st, unit_K(), 1);
  REQUIRE(!d.peaks.empty());
  CHECK(d.peaks[0].height == doctest::Approx(t).epsilon(1e-6));
  CHECK(geodesic_distance(d.peaks[0].location, SpherePoint::axis(3)) < 1e-9);
  CHECK(d.peaks[0].profile_error < 0.02);
  CHECK(d.peaks[0].concentrating);
  CHECK(d.resolution_ok);  // t = 8 <= L/4 = 16
}

TEST_CASE("diagnostics flags the constant state as non-concentrating") {
  SolverState st;
  st.tau = 0.3;
  st.L = 16;
  st.v = constant_zonal(16, 1.0);
  st.converged = true;
  st.positive = true;
  const BlowupDiagnostics d = diagnostics(st, unit_K(), 1);
  REQUIRE(!d.peaks.empty());
  CHECK(!d.peaks[0].concentrating);
}

TEST_CASE("continuation on K = 1 stays on the constant branch") {
  SolverState init;
  init.v = constant_zonal(24, 1.0);
  const ContinuationResult res = continuation(0.5, 0.05, 6, unit_K(), init);
  CHECK(res.points.size() == 7);
  for (const BranchPoint& bp : res.points) {
    CHECK(bp.state.converged);
    CHECK(bp.state.v.coeffs[0] == doctest::Approx(std::sqrt(kVolS3)).epsilon(1e-8));
    CHECK(!bp.diag.peaks.empty());
    CHECK(!bp.diag.peaks[0].concentrating);
  }
}

TEST_CASE("continuation aborts on the resolution guard at tiny L") {
  SolverState init;
  init.v = constant_zonal(32, 0.25);
  const ContinuationResult res = continuation(0.5, 0.001, 40, tilted(), init);
  CHECK(res.aborted_resolution);
  CHECK(res.largest_trustworthy_tau > 0.001);
  CHECK(res.note.find("resolution") != std::string::npos);
}

TEST_CASE("branch csv writer emits a labeled header and rows") {
  SolverState init;
  init.v = constant_zonal(24, 1.0);
  const ContinuationResult res = continuation(0.4, 0.1, 3, unit_K(), init);
  std::ostringstream os;
  write_branch_csv(os, res);
  const std::string s = os.str();
  CHECK(s.find("tau,residual,rhs,positive") != std::string::npos);
  CHECK(s.find("tau_m_sq") != std::string::npos);
  CHECK(std::count(s.begin(), s.end(), '\n') >= 5);
}

TEST_CASE("tau domain is validated") {
  CHECK_THROWS_AS(newton_solve(constant_full(6, 1.0), 2.5, unit_K()), std::invalid_argument);
  CHECK_THROWS_AS(newton_solve(constant_full(6, 1.0), 0.0, unit_K()), std::invalid_argument);
}
