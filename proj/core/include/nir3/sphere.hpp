#pragma once

#include <array>
#include <cstdint>
#include <vector>

// Points, distances, charts and tangent frames on the unit 3-sphere in R^4.

namespace nir3 {

struct Vec3 {
  double x[3]{0, 0, 0};
  double& operator[](int i) { return x[i]; }
  double operator[](int i) const { return x[i]; }
};

struct Vec4 {
  double x[4]{0, 0, 0, 0};
  double& operator[](int i) { return x[i]; }
  double operator[](int i) const { return x[i]; }
};

double dot(const Vec3& a, const Vec3& b);
double dot(const Vec4& a, const Vec4& b);
double norm(const Vec3& a);
double norm(const Vec4& a);
Vec4 operator+(const Vec4& a, const Vec4& b);
Vec4 operator-(const Vec4& a, const Vec4& b);
Vec4 operator*(double s, const Vec4& a);

// Unit vector in R^4; |x| = 1 is enforced at construction (tol 1e-12 before
// renormalization; grossly non-unit input is rejected).
class SpherePoint {
 public:
  SpherePoint();  // north pole e4
  explicit SpherePoint(const Vec4& v);
  SpherePoint(double x1, double x2, double x3, double x4);

  const Vec4& vec() const { return v_; }
  double operator[](int i) const { return v_[i]; }

  static SpherePoint axis(int i);  // e_i, i in [0,4)

 private:
  Vec4 v_;
};

// chi in [0,pi], theta in [0,pi], phi in [0,2pi). Round-trips with
// SpherePoint via
//   x = (sin chi sin theta cos phi, sin chi sin theta sin phi,
//        sin chi cos theta, cos chi).
struct HypersphericalCoords {
  double chi = 0;
  double theta = 0;
  double phi = 0;
};

SpherePoint to_sphere(const HypersphericalCoords& c);
HypersphericalCoords to_hyperspherical(const SpherePoint& p);

// arccos of the clamped inner product, in [0, pi].
double geodesic_distance(const SpherePoint& p, const SpherePoint& q);

// Inverse stereographic chart: y in R^3 -> (2y/(1+|y|^2), (|y|^2-1)/(1+|y|^2)).
// y = 0 maps to the south pole -e4; |y| -> infinity approaches e4.
SpherePoint stereographic_to_sphere(const Vec3& y);

// Forward chart; the north pole e4 has no image and is rejected.
Vec3 sphere_to_stereographic(const SpherePoint& p);

// Conformal factor of the chart, 2/(1+|y|^2).
double conformal_factor(const Vec3& y);

// Chart radius of a point at geodesic distance d from the chart base point
// (the projection's south pole): tan(d/2).
double chart_radius(double geodesic_d);

// Geodesic from p with unit tangent u: cos(d) p + sin(d) u.
SpherePoint geodesic_step(const SpherePoint& p, const Vec4& unit_tangent, double d);

// Orthonormal tangent frame at p, built by Gram-Schmidt on the three ambient
// axes least aligned with p. Deterministic and singularity-free.
std::array<Vec4, 3> tangent_frame(const SpherePoint& p);

// Rotations of R^4 (orthogonal 4x4, row-major).
struct Rotation4 {
  std::array<double, 16> m;  // identity by default
  Rotation4();
  Vec4 apply(const Vec4& v) const;
  SpherePoint apply(const SpherePoint& p) const;
  Rotation4 transpose() const;
  Rotation4 compose(const Rotation4& other) const;  // this * other

  // Givens rotation by angle in the (i, j) coordinate plane, 0-based.
  static Rotation4 givens(int i, int j, double angle);
  // Haar-ish random rotation from a seeded generator (Gram-Schmidt of
  // Gaussian columns); deterministic per seed.
  static Rotation4 random(std::uint64_t seed);
};

// Deterministic low-discrepancy point set on S^3 (double Fibonacci spiral in
// the Hopf-like angles). Used for multi-start searches; `seed` applies a
// fixed rotation so distinct seeds give distinct but reproducible sets.
std::vector<SpherePoint> low_discrepancy_points(int n, std::uint64_t seed = 0);

}  // namespace nir3
