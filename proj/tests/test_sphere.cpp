#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nir3/constants.hpp"
#include "nir3/polynomial.hpp"
#include "nir3/quadrature.hpp"
#include "nir3/sphere.hpp"
#include "oracles.hpp"

using namespace nir3;

TEST_CASE("geodesic distance basics") {
  std::mt19937_64 rng(11);
  const SpherePoint p = test::random_point(rng);
  CHECK(geodesic_distance(p, p) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(geodesic_distance(p, SpherePoint(-1.0 * p.vec())) == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(geodesic_distance(SpherePoint::axis(3), SpherePoint::axis(2)) ==
        doctest::Approx(kPi / 2).epsilon(1e-12));
}

TEST_CASE("distance is rotation equivariant") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 20; ++i) {
    const SpherePoint p = test::random_point(rng);
    const SpherePoint q = test::random_point(rng);
    const Rotation4 R = Rotation4::random(1000 + i);
    CHECK(std::abs(geodesic_distance(R.apply(p), R.apply(q)) - geodesic_distance(p, q)) < 1e-12);
  }
}

TEST_CASE("stereographic chart") {
  const SpherePoint south = stereographic_to_sphere(Vec3{0, 0, 0});
  CHECK(south[3] == doctest::Approx(-1.0));
  const SpherePoint p = stereographic_to_sphere(Vec3{1, 0, 0});
  CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p[3] == doctest::Approx(0.0).epsilon(1e-14));
  const SpherePoint near_north = stereographic_to_sphere(Vec3{1e8, 0, 0});
  CHECK(near_north[3] > 1.0 - 1e-10);

  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int i = 0; i < 50; ++i) {
    const Vec3 y{u(rng), u(rng), u(rng)};
    const Vec3 back = sphere_to_stereographic(stereographic_to_sphere(y));
    for (int c = 0; c < 3; ++c) CHECK(std::abs(back[c] - y[c]) < 1e-12 * (1.0 + std::abs(y[c])));
  }
  CHECK_THROWS_AS(sphere_to_stereographic(SpherePoint::axis(3)), std::domain_error);
}

TEST_CASE("conformal factor") {
  CHECK(conformal_factor(Vec3{0, 0, 0}) == doctest::Approx(2.0));
  CHECK(conformal_factor(Vec3{1, 0, 0}) == doctest::Approx(1.0));
  CHECK(conformal_factor(Vec3{3, 0, 0}) == doctest::Approx(0.2));
}

TEST_CASE("hyperspherical coordinates round trip") {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 100; ++i) {
    const SpherePoint p = test::random_point(rng);
    const SpherePoint q = to_sphere(to_hyperspherical(p));
    for (int c = 0; c < 4; ++c) CHECK(std::abs(p[c] - q[c]) < 1e-12);
  }
}

TEST_CASE("grid integrates the volume and low harmonics") {
  auto grid = QuadratureGrid::build(6);
  double sw = 0;
  for (double w : grid->weights()) sw += w;
  CHECK(sw == doctest::Approx(kVolS3).epsilon(1e-10));
  const SphericalField x4 = sample(grid, [](const SpherePoint& p) { return p[3]; });
  CHECK(std::abs(x4.integral()) < 1e-10);
  const SphericalField x4sq = sample(grid, [](const SpherePoint& p) { return p[3] * p[3]; });
  CHECK(x4sq.integral() == doctest::Approx(kVolS3 / 4).epsilon(1e-10));
}

TEST_CASE("grid exactness against closed-form monomial moments") {
  auto grid = QuadratureGrid::build(5);  // order 11
  std::mt19937_64 rng(15);
  std::uniform_int_distribution<int> pw(0, 3);
  for (int trial = 0; trial < 40; ++trial) {
    int a[4] = {pw(rng), pw(rng), pw(rng), pw(rng)};
    if (a[0] + a[1] + a[2] + a[3] > grid->order()) continue;
    const SphericalField f = sample(grid, [&](const SpherePoint& p) {
      double v = 1;
      for (int i = 0; i < 4; ++i)
        for (int k = 0; k < a[i]; ++k) v *= p[i];
      return v;
    });
    const double want = test::sphere_monomial_moment(a[0], a[1], a[2], a[3]);
    CHECK(std::abs(f.integral() - want) < 1e-10 * (1.0 + std::abs(want)));
  }
}

TEST_CASE("grid resource guard") {
  CHECK_THROWS_WITH_AS(QuadratureGrid::build_order(4000), doctest::Contains("MiB"), std::runtime_error);
}

TEST_CASE("polynomial parser") {
  const AmbientPolynomial K = AmbientPolynomial::parse("x4 + 2");
  CHECK(K.eval(SpherePoint::axis(3).vec()) == doctest::Approx(3.0));
  const AmbientPolynomial P = AmbientPolynomial::parse("2*x1^2*x3 \xe2\x88\x92 x2 + 2");
  CHECK(P.eval(Vec4{1, 1, 1, 0}) == doctest::Approx(2.0 - 1.0 + 2.0));
  CHECK(P.degree() == 3);
  CHECK_THROWS_WITH_AS(AmbientPolynomial::parse("x5 + 1"), doctest::Contains("column"),
                       std::invalid_argument);
  CHECK_THROWS_AS(AmbientPolynomial::parse("2 +"), std::invalid_argument);
  CHECK_THROWS_AS(AmbientPolynomial::parse(""), std::invalid_argument);
}

TEST_CASE("polynomial rotation pullback") {
  const AmbientPolynomial K = AmbientPolynomial::parse("2*x1^2*x3 - x2 + 2");
  const Rotation4 R = Rotation4::random(77);
  const AmbientPolynomial KR = K.rotated(R);
  std::mt19937_64 rng(16);
  for (int i = 0; i < 20; ++i) {
    const SpherePoint p = test::random_point(rng);
    CHECK(KR.eval(R.apply(p).vec()) == doctest::Approx(K.eval(p.vec())).epsilon(1e-12));
  }
}

TEST_CASE("sphere derivatives closed forms") {
  const AmbientPolynomial one = AmbientPolynomial::constant(1.0);
  std::mt19937_64 rng(17);
  const SpherePoint p = test::random_point(rng);
  const SphereDerivatives d0 = sphere_derivatives(one, p);
  CHECK(norm(d0.gradient) == doctest::Approx(0.0));
  CHECK(d0.laplacian == doctest::Approx(0.0));

  const AmbientPolynomial K = AmbientPolynomial::parse("x4 + 2");
  const SphereDerivatives dn = sphere_derivatives(K, SpherePoint::axis(3));
  CHECK(dn.value == doctest::Approx(3.0));
  CHECK(norm(dn.gradient) < 1e-14);
  CHECK(dn.laplacian == doctest::Approx(-3.0).epsilon(1e-13));
  const SphereDerivatives ds = sphere_derivatives(K, SpherePoint(0, 0, 0, -1));
  CHECK(ds.value == doctest::Approx(1.0));
  CHECK(ds.laplacian == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("sphere derivatives match geodesic finite differences") {
  const AmbientPolynomial K = AmbientPolynomial::parse("2*x1^2*x3 - x2 + x4 + 3");
  std::mt19937_64 rng(18);
  const SpherePoint p = test::random_point(rng);
  const SphereDerivatives d = sphere_derivatives(K, p);
  const auto frame = tangent_frame(p);

  const auto fd_errors = [&](double h) {
    double grad_err = 0, lap_fd = 0;
    for (int a = 0; a < 3; ++a) {
      const double fp = K.eval(geodesic_step(p, frame[a], h).vec());
      const double fm = K.eval(geodesic_step(p, frame[a], -h).vec());
      grad_err = std::max(grad_err, std::abs((fp - fm) / (2 * h) - dot(d.gradient, frame[a])));
      lap_fd += (fp - 2.0 * K.eval(p.vec()) + fm) / (h * h);
    }
    return std::pair{grad_err, std::abs(lap_fd - d.laplacian)};
  };
  const auto [g1, l1] = fd_errors(1e-3);
  const auto [g2, l2] = fd_errors(5e-4);
  CHECK(std::log2(g1 / g2) > 1.9);
  CHECK(std::log2(l1 / l2) > 1.9);
}

TEST_CASE("intrinsic hessian in the frame is symmetric and consistent") {
  const AmbientPolynomial K = AmbientPolynomial::parse("x1^2 + 2*x4 + 3");
  std::mt19937_64 rng(19);
  const SpherePoint p = test::random_point(rng);
  const SphereDerivatives d = sphere_derivatives(K, p);
  double trace = 0;
  for (int a = 0; a < 3; ++a) {
    trace += d.hessian[a * 3 + a];
    for (int b = 0; b < 3; ++b) CHECK(d.hessian[a * 3 + b] == doctest::Approx(d.hessian[b * 3 + a]));
  }
  // Lap = trace of the intrinsic Hessian at a critical or any point.
  CHECK(trace == doctest::Approx(d.laplacian).epsilon(1e-10));
}

TEST_CASE("low discrepancy points are unit and deterministic") {
  const auto pts = low_discrepancy_points(64, 5);
  const auto pts2 = low_discrepancy_points(64, 5);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(std::abs(norm(pts[i].vec()) - 1.0) < 1e-12);
    for (int c = 0; c < 4; ++c) CHECK(pts[i][c] == pts2[i][c]);
  }
}
