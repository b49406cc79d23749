#pragma once

#include <array>
#include <string>
#include <vector>

#include "nir3/sphere.hpp"

// Polynomials in the ambient coordinates x1..x4. The prescribed curvature K
// is carried as such a polynomial restricted to S^3, which keeps every
// derivative closed-form.

namespace nir3 {

struct Monomial {
  double coeff = 0;
  std::array<int, 4> powers{0, 0, 0, 0};
};

class AmbientPolynomial {
 public:
  AmbientPolynomial() = default;
  explicit AmbientPolynomial(std::vector<Monomial> terms);
  static AmbientPolynomial constant(double c);

  // Parses a sum of monomials, e.g. "x4 + 2" or "2*x1^2*x3 - x2 + 2".
  // Both ASCII '-' and U+2212 are accepted. Throws std::invalid_argument
  // with a column number on malformed input.
  static AmbientPolynomial parse(const std::string& expr);

  const std::vector<Monomial>& terms() const { return terms_; }
  int degree() const;
  bool empty() const { return terms_.empty(); }
  std::string to_string() const;

  double eval(const Vec4& x) const;
  double eval(const SpherePoint& p) const { return eval(p.vec()); }
  Vec4 gradient(const Vec4& x) const;
  // Ambient Hessian, row-major 4x4.
  std::array<double, 16> hessian(const Vec4& x) const;
  double ambient_laplacian(const Vec4& x) const;

  AmbientPolynomial operator+(const AmbientPolynomial& o) const;
  AmbientPolynomial operator*(const AmbientPolynomial& o) const;
  AmbientPolynomial scaled(double c) const;
  // K(x) -> K(R^T x): the pullback under the rotation R, so that
  // rotated.eval(R p) == eval(p).
  AmbientPolynomial rotated(const Rotation4& r) const;

  // Rough C^2 magnitude: max over sample points of |K| + |grad| + |Hess|.
  double c2_sample_norm(int n_samples = 512) const;
  // Min over low-discrepancy samples; used for the K > 0 domain check.
  double min_on_sphere_sampled(int n_samples = 4096) const;

 private:
  void normalize();
  std::vector<Monomial> terms_;
};

// Restriction of the ambient extension to the sphere at p:
//   value, tangential gradient (ambient 4-vector, orthogonal to p),
//   intrinsic Hessian in the `tangent_frame(p)` basis (row-major 3x3),
//   Laplace-Beltrami value.
struct SphereDerivatives {
  double value = 0;
  Vec4 gradient{};
  std::array<double, 9> hessian{};
  double laplacian = 0;
};

// grad_S K = (I - p p^T) grad K~;
// Hess_S K(e_a, e_b) = Hess K~(e_a, e_b) - (p . grad K~) delta_ab;
// Lap_S K = Lap K~ - Hess K~(p, p) - 3 p . grad K~.
SphereDerivatives sphere_derivatives(const AmbientPolynomial& K, const SpherePoint& p);

}  // namespace nir3
