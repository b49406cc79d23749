#include "nir3/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "nir3/constants.hpp"

namespace nir3 {

double dot(const Vec3& a, const Vec3& b) { return a.x[0] * b.x[0] + a.x[1] * b.x[1] + a.x[2] * b.x[2]; }

double dot(const Vec4& a, const Vec4& b) {
  return a.x[0] * b.x[0] + a.x[1] * b.x[1] + a.x[2] * b.x[2] + a.x[3] * b.x[3];
}

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
double norm(const Vec4& a) { return std::sqrt(dot(a, a)); }

Vec4 operator+(const Vec4& a, const Vec4& b) {
  return Vec4{a.x[0] + b.x[0], a.x[1] + b.x[1], a.x[2] + b.x[2], a.x[3] + b.x[3]};
}
Vec4 operator-(const Vec4& a, const Vec4& b) {
  return Vec4{a.x[0] - b.x[0], a.x[1] - b.x[1], a.x[2] - b.x[2], a.x[3] - b.x[3]};
}
Vec4 operator*(double s, const Vec4& a) { return Vec4{s * a.x[0], s * a.x[1], s * a.x[2], s * a.x[3]}; }

SpherePoint::SpherePoint() : v_{0, 0, 0, 1} {}

SpherePoint::SpherePoint(const Vec4& v) : v_(v) {
  const double n = norm(v_);
  if (!(std::abs(n - 1.0) < 1e-8)) {
    throw std::invalid_argument("SpherePoint: |x| deviates from 1 by more than 1e-8");
  }
  // Renormalize so downstream code can rely on |x| = 1 to 1e-12.
  for (double& c : v_.x) c /= n;
}

SpherePoint::SpherePoint(double x1, double x2, double x3, double x4) : SpherePoint(Vec4{x1, x2, x3, x4}) {}

SpherePoint SpherePoint::axis(int i) {
  Vec4 v;
  v[i] = 1.0;
  return SpherePoint(v);
}

SpherePoint to_sphere(const HypersphericalCoords& c) {
  const double sc = std::sin(c.chi), cc = std::cos(c.chi);
  const double st = std::sin(c.theta), ct = std::cos(c.theta);
  return SpherePoint(sc * st * std::cos(c.phi), sc * st * std::sin(c.phi), sc * ct, cc);
}

HypersphericalCoords to_hyperspherical(const SpherePoint& p) {
  HypersphericalCoords c;
  c.chi = std::acos(std::clamp(p[3], -1.0, 1.0));
  const double s = std::sqrt(std::max(0.0, 1.0 - p[3] * p[3]));
  if (s < 1e-300) {
    c.theta = 0;
    c.phi = 0;
    return c;
  }
  c.theta = std::acos(std::clamp(p[2] / s, -1.0, 1.0));
  c.phi = std::atan2(p[1], p[0]);
  if (c.phi < 0) c.phi += kTwoPi;
  return c;
}

double geodesic_distance(const SpherePoint& p, const SpherePoint& q) {
  return std::acos(std::clamp(dot(p.vec(), q.vec()), -1.0, 1.0));
}

SpherePoint stereographic_to_sphere(const Vec3& y) {
  const double r2 = dot(y, y);
  const double d = 1.0 + r2;
  return SpherePoint(2.0 * y[0] / d, 2.0 * y[1] / d, 2.0 * y[2] / d, (r2 - 1.0) / d);
}

Vec3 sphere_to_stereographic(const SpherePoint& p) {
  const double d = 1.0 - p[3];
  if (d < 1e-14) {
    throw std::domain_error("sphere_to_stereographic: projection undefined at the north pole");
  }
  return Vec3{p[0] / d, p[1] / d, p[2] / d};
}

double conformal_factor(const Vec3& y) { return 2.0 / (1.0 + dot(y, y)); }

double chart_radius(double geodesic_d) { return std::tan(0.5 * geodesic_d); }

SpherePoint geodesic_step(const SpherePoint& p, const Vec4& u, double d) {
  return SpherePoint(std::cos(d) * p.vec() + std::sin(d) * u);
}

std::array<Vec4, 3> tangent_frame(const SpherePoint& p) {
  // Drop the ambient axis most aligned with p, orthonormalize the rest.
  int drop = 0;
  for (int i = 1; i < 4; ++i) {
    if (std::abs(p[i]) > std::abs(p[drop])) drop = i;
  }
  std::array<Vec4, 3> frame{};
  int k = 0;
  for (int i = 0; i < 4; ++i) {
    if (i == drop) continue;
    Vec4 e;
    e[i] = 1.0;
    e = e - dot(e, p.vec()) * p.vec();
    for (int j = 0; j < k; ++j) e = e - dot(e, frame[j]) * frame[j];
    frame[k] = (1.0 / norm(e)) * e;
    ++k;
  }
  return frame;
}

Rotation4::Rotation4() : m{} {
  for (int i = 0; i < 4; ++i) m[i * 4 + i] = 1.0;
}

Vec4 Rotation4::apply(const Vec4& v) const {
  Vec4 r;
  for (int i = 0; i < 4; ++i) {
    double s = 0;
    for (int j = 0; j < 4; ++j) s += m[i * 4 + j] * v[j];
    r[i] = s;
  }
  return r;
}

SpherePoint Rotation4::apply(const SpherePoint& p) const { return SpherePoint(apply(p.vec())); }

Rotation4 Rotation4::transpose() const {
  Rotation4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r.m[i * 4 + j] = m[j * 4 + i];
  return r;
}

Rotation4 Rotation4::compose(const Rotation4& o) const {
  Rotation4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double s = 0;
      for (int k = 0; k < 4; ++k) s += m[i * 4 + k] * o.m[k * 4 + j];
      r.m[i * 4 + j] = s;
    }
  return r;
}

Rotation4 Rotation4::givens(int i, int j, double angle) {
  if (i < 0 || i > 3 || j < 0 || j > 3 || i == j) {
    throw std::invalid_argument("Rotation4::givens: plane indices must be distinct in [0,4)");
  }
  Rotation4 r;
  const double c = std::cos(angle), s = std::sin(angle);
  r.m[i * 4 + i] = c;
  r.m[j * 4 + j] = c;
  r.m[i * 4 + j] = -s;
  r.m[j * 4 + i] = s;
  return r;
}

Rotation4 Rotation4::random(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> gauss(0.0, 1.0);
  // Gram-Schmidt of a Gaussian matrix; sign-fix the diagonal so the
  // distribution is Haar over O(4).
  std::array<Vec4, 4> q;
  for (int c = 0; c < 4; ++c) {
    Vec4 v;
    for (int i = 0; i < 4; ++i) v[i] = gauss(rng);
    for (int prev = 0; prev < c; ++prev) v = v - dot(v, q[prev]) * q[prev];
    q[c] = (1.0 / norm(v)) * v;
  }
  Rotation4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r.m[i * 4 + j] = q[j][i];
  return r;
}

std::vector<SpherePoint> low_discrepancy_points(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("low_discrepancy_points: n must be >= 1");
  // Double-spiral construction: uniform in the Hopf cell volume, golden and
  // plastic increments in the two fiber angles.
  constexpr double kGolden = 1.61803398874989484820;
  constexpr double kPlastic = 1.32471795724474602596;
  const Rotation4 rot = seed == 0 ? Rotation4() : Rotation4::random(seed);
  std::vector<SpherePoint> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double u = (i + 0.5) / n;
    const double eta = std::acos(1.0 - 2.0 * u) * 0.5;  // in [0, pi/2]
    const double a = kTwoPi * std::fmod(i * kGolden, 1.0);
    const double b = kTwoPi * std::fmod(i * kPlastic, 1.0);
    Vec4 v{std::cos(eta) * std::cos(a), std::cos(eta) * std::sin(a), std::sin(eta) * std::cos(b),
           std::sin(eta) * std::sin(b)};
    pts.push_back(rot.apply(SpherePoint(v)));
  }
  return pts;
}

}  // namespace nir3
