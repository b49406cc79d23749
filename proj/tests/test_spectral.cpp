#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "nir3/bubbles.hpp"
#include "nir3/constants.hpp"
#include "nir3/polynomial.hpp"
#include "nir3/spectral.hpp"
#include "oracles.hpp"

using namespace nir3;

namespace {
std::shared_ptr<const QuadratureGrid> grid8() {
  static auto g = QuadratureGrid::build(8);
  return g;
}
}  // namespace

TEST_CASE("forward transform of simple fields") {
  auto grid = grid8();
  const HarmonicSpectrum s = forward_transform(sample(grid, [](const SpherePoint&) { return 1.0; }), 8);
  CHECK(s.coeffs[0] == doctest::Approx(std::sqrt(kVolS3)).epsilon(1e-12));
  for (std::size_t i = 1; i < s.coeffs.size(); ++i) CHECK(std::abs(s.coeffs[i]) < 1e-12);

  const HarmonicSpectrum sx = forward_transform(sample(grid, [](const SpherePoint& p) { return p[3]; }), 8);
  for (int l = 0; l <= 8; ++l) {
    const std::size_t off = degree_offset(l);
    const std::size_t n = static_cast<std::size_t>(l + 1) * (l + 1);
    double mag = 0;
    for (std::size_t i = 0; i < n; ++i) mag = std::max(mag, std::abs(sx.coeffs[off + i]));
    if (l == 1) CHECK(mag > 0.1);
    else CHECK(mag < 1e-12);
  }
}

TEST_CASE("round trip is the identity on band-limited fields") {
  auto grid = grid8();
  const HarmonicSpectrum r = test::random_spectrum(8, 21);
  const HarmonicSpectrum r2 = forward_transform(inverse_transform(r, grid), 8);
  for (std::size_t i = 0; i < r.coeffs.size(); ++i) CHECK(std::abs(r.coeffs[i] - r2.coeffs[i]) < 1e-10);
}

TEST_CASE("separable transform matches the dense projection oracle") {
  auto grid = QuadratureGrid::build(6);
  const SphericalField f = sample(grid, [](const SpherePoint& p) {
    return std::exp(p[0]) + p[1] * p[3] - 0.3 * p[2];
  });
  const HarmonicSpectrum fast = forward_transform(f, 6);
  const HarmonicSpectrum slow = test::dense_forward(f, 6);
  for (std::size_t i = 0; i < fast.coeffs.size(); ++i) {
    CHECK(fast.coeffs[i] == doctest::Approx(slow.coeffs[i]).epsilon(1e-10));
  }
}

TEST_CASE("Parseval for band-limited fields") {
  auto grid = grid8();
  const HarmonicSpectrum r = test::random_spectrum(8, 22);
  const SphericalField f = inverse_transform(r, grid);
  double sum_sq = 0;
  for (double c : r.coeffs) sum_sq += c * c;
  double quad = 0;
  for (std::size_t i = 0; i < f.values.size(); ++i) quad += grid->weights()[i] * f.values[i] * f.values[i];
  CHECK(sum_sq == doctest::Approx(quad).epsilon(1e-8));
}

TEST_CASE("under-resolved grid is rejected with the required order") {
  auto grid = QuadratureGrid::build_order(10);
  const SphericalField f = sample(grid, [](const SpherePoint&) { return 1.0; });
  CHECK_THROWS_WITH_AS(forward_transform(f, 8), doctest::Contains("16"), std::invalid_argument);
}

TEST_CASE("half-Laplacian multipliers") {
  HarmonicSpectrum s = test::random_spectrum(6, 23);
  const HarmonicSpectrum ps = apply_p_half(s);
  // l = 0 block unchanged (P 1 = 1), degree-1 block x2.
  CHECK(ps.coeffs[0] == doctest::Approx(s.coeffs[0]));
  for (std::size_t i = degree_offset(1); i < degree_offset(2); ++i) {
    CHECK(ps.coeffs[i] == doctest::Approx(2.0 * s.coeffs[i]));
  }
  const HarmonicSpectrum back = apply_p_half(ps, /*invert=*/true);
  for (std::size_t i = 0; i < s.coeffs.size(); ++i) {
    CHECK(std::abs(back.coeffs[i] - s.coeffs[i]) < 1e-12 * (1.0 + std::abs(s.coeffs[i])));
  }
}

TEST_CASE("Laplace-Beltrami multipliers") {
  auto grid = grid8();
  HarmonicSpectrum c = HarmonicSpectrum::zeros(4);
  c.coeffs[0] = 1.0;
  CHECK(laplace_beltrami(c).l2_norm() == doctest::Approx(0.0));

  const HarmonicSpectrum sx = forward_transform(sample(grid, [](const SpherePoint& p) { return p[3]; }), 8);
  const SphericalField lap = inverse_transform(laplace_beltrami(sx), grid);
  for (std::size_t i = 0; i < lap.values.size(); i += 997) {
    CHECK(lap.values[i] == doctest::Approx(-3.0 * grid->nodes()[i][3]).epsilon(1e-10));
  }

  HarmonicSpectrum d2 = HarmonicSpectrum::zeros(4);
  d2.coeffs[degree_offset(2) + 3] = 1.0;
  CHECK(laplace_beltrami(d2).coeffs[degree_offset(2) + 3] == doctest::Approx(-8.0));
}

TEST_CASE("spectral Laplacian equals the restriction formula pointwise") {
  auto grid = grid8();
  const AmbientPolynomial K = AmbientPolynomial::parse("2*x1^2*x3 - x2 + x4 + 3");
  const HarmonicSpectrum s = forward_transform(sample(grid, [&](const SpherePoint& p) {
    return K.eval(p.vec());
  }), 8);
  const SphericalField lap = inverse_transform(laplace_beltrami(s), grid);
  for (std::size_t i = 0; i < lap.values.size(); i += 1201) {
    const SphereDerivatives d = sphere_derivatives(K, grid->nodes()[i]);
    CHECK(std::abs(lap.values[i] - d.laplacian) < 1e-8);
  }
}

TEST_CASE("self-adjointness and positivity of the quadratic form") {
  const HarmonicSpectrum u = test::random_spectrum(8, 24);
  const HarmonicSpectrum v = test::random_spectrum(8, 25);
  // <P u, v>_{L2} = <u, P v>_{L2} in coefficient space.
  const HarmonicSpectrum pu = apply_p_half(u);
  const HarmonicSpectrum pv = apply_p_half(v);
  double a = 0, b = 0;
  for (std::size_t i = 0; i < u.coeffs.size(); ++i) {
    a += pu.coeffs[i] * v.coeffs[i];
    b += u.coeffs[i] * pv.coeffs[i];
  }
  CHECK(a == doctest::Approx(b).epsilon(1e-10));
  CHECK(hsigma_inner(u, u) > 0);
}

TEST_CASE("zonal expansion picks out single degrees") {
  const HarmonicSpectrum c = zonal_expand([](double) { return 1.0; }, 6);
  CHECK(c.coeffs[0] == doctest::Approx(std::sqrt(kVolS3)).epsilon(1e-10));
  for (int l = 1; l <= 6; ++l) CHECK(std::abs(c.coeffs[l]) < 1e-10);

  const HarmonicSpectrum z = zonal_expand([](double chi) { return std::cos(chi); }, 6);
  for (int l = 0; l <= 6; ++l) {
    if (l == 1) CHECK(z.coeffs[l] == doctest::Approx(kPi / std::sqrt(2.0)).epsilon(1e-10));
    else CHECK(std::abs(z.coeffs[l]) < 1e-10);
  }
}

TEST_CASE("Green kernel zonal coefficients are flat") {
  // P_sigma (1/(1-cos d)) = 4 pi^2 delta_pole, so every zonal coefficient is
  // 4 pi^2 Z_l(0)/(l+1) = 2 sqrt(2) pi. The 1-cos cancellation in the naive
  // kernel caps the attainable accuracy near 1e-8 relative.
  const HarmonicSpectrum g = zonal_expand([](double chi) { return 1.0 / (1.0 - std::cos(chi)); }, 32);
  for (int l = 0; l <= 32; ++l) {
    CHECK(g.coeffs[l] == doctest::Approx(2.0 * std::sqrt(2.0) * kPi).epsilon(1e-7));
  }
  // Singularities stronger than chi^{-2} are rejected.
  CHECK_THROWS_AS(zonal_expand([](double chi) { return std::pow(chi, -2.5); }, 4), std::runtime_error);
}

TEST_CASE("truncated Green kernel: spike at the pole dominates with L") {
  // apply_p_half on the truncated kernel gives the truncated reproducing
  // kernel: a spike at the pole over an oscillatory tail. Away from the pole
  // the field minus its mean, normalized by the spike height, decays with L;
  // the measured slope is reported.
  std::vector<double> logL, lognorm;
  for (int L : {8, 16, 32}) {
    const HarmonicSpectrum g = zonal_expand([](double chi) { return 1.0 / (1.0 - std::cos(chi)); }, L);
    const HarmonicSpectrum pg = apply_p_half(g);
    const double mean = pg.coeffs[0] / std::sqrt(kVolS3);
    CHECK(mean == doctest::Approx(2.0).epsilon(1e-6));  // 4 pi^2 / |S^3|
    double sup = 0;
    for (double chi = kPi / 4; chi < kPi; chi += 0.01) {
      double val = 0;
      for (int l = 0; l <= L; ++l) val += pg.coeffs[l] * zonal_harmonic(l, chi);
      sup = std::max(sup, std::abs(val - mean));
    }
    double pole = 0;
    for (int l = 0; l <= L; ++l) pole += pg.coeffs[l] * (l + 1.0) / std::sqrt(kVolS3);
    CHECK(pole > L * L / 2.0);  // spike growth
    logL.push_back(std::log(static_cast<double>(L)));
    lognorm.push_back(std::log(sup / pole));
  }
  for (std::size_t i = 1; i < lognorm.size(); ++i) CHECK(lognorm[i] < lognorm[i - 1]);
  MESSAGE("normalized far-field sup slope vs L: ", test::fit_slope(logL, lognorm));
}

TEST_CASE("zonal grid synthesis/analysis round trip") {
  const ZonalGrid zg = ZonalGrid::build(40);
  HarmonicSpectrum z = HarmonicSpectrum::zonal_zeros(16);
  std::mt19937_64 rng(26);
  std::normal_distribution<double> g;
  for (double& c : z.coeffs) c = g(rng);
  const HarmonicSpectrum z2 = zonal_analyze(zonal_synthesize(z, zg), zg, 16);
  for (int l = 0; l <= 16; ++l) CHECK(z.coeffs[l] == doctest::Approx(z2.coeffs[l]).epsilon(1e-11));
}

TEST_CASE("zonal spectra embed into full spectra") {
  const HarmonicSpectrum z = bubble_zonal_spectrum(3.0, 10);
  const HarmonicSpectrum full = zonal_to_full(z);
  std::mt19937_64 rng(27);
  for (int i = 0; i < 10; ++i) {
    const SpherePoint p = test::random_point(rng);
    CHECK(evaluate(full, p) == doctest::Approx(evaluate(z, p)).epsilon(1e-11));
  }
}

TEST_CASE("spectrum serialization round trip") {
  const HarmonicSpectrum s = test::random_spectrum(5, 28);
  std::stringstream ss;
  save_spectrum(ss, s);
  const HarmonicSpectrum t = load_spectrum(ss);
  CHECK(t.L == s.L);
  for (std::size_t i = 0; i < s.coeffs.size(); ++i) CHECK(t.coeffs[i] == doctest::Approx(s.coeffs[i]));

  std::stringstream bad("# other format\n");
  CHECK_THROWS_AS(load_spectrum(bad), std::runtime_error);
}

TEST_CASE("hsigma_inner requires matching representations") {
  const HarmonicSpectrum a = test::random_spectrum(4, 29);
  const HarmonicSpectrum b = test::random_spectrum(5, 30);
  CHECK_THROWS_AS(hsigma_inner(a, b), std::invalid_argument);
}
