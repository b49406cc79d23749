#pragma once

#include <iosfwd>
#include <vector>

#include "nir3/polynomial.hpp"

// Pohozaev boundary terms on half-balls of R^4_+ at n = 3, sigma = 1/2 for
// the analytic profile family U(X) = a |X|^{-2} + M + alpha(X). The
// extension weight t^{1-2 sigma} is identically 1 at sigma = 1/2; it is kept
// as an explicit factor (chi^0) rather than silently dropped.

namespace nir3 {

// alpha is a polynomial in X = (y1, y2, y3, t) with alpha(0) = 0.
struct HalfBallProfile {
  double a = 1.0;  // coefficient of |X|^{-2}, >= 0
  double M = 0.0;
  AmbientPolynomial alpha;  // alpha(0) = 0 enforced

  HalfBallProfile() = default;
  HalfBallProfile(double a_, double M_, AmbientPolynomial alpha_);

  double value(const Vec4& X) const;
  Vec4 gradient(const Vec4& X) const;
};

struct FluxResult {
  double Bpp = 0;  // int_{upper hemisphere |X|=delta} t^{1-2s} B''
  double Bp = 0;   // int_{flat disc |y|<=delta} B'
  bool Bp_finite = true;
};

// B'' = (n-2s)/2 U dU/dnu - R/2 |grad U|^2 + R |dU/dnu|^2 at R = delta;
// B'  = (n-2s)/2 K U^{p+1} + <X, grad U> K U^p on the flat disc.
// Quadrature orders are doubled until two consecutive results agree to 1e-9
// relative; non-convergence raises an error. The disc integral diverges for
// singular profiles (a > 0) with p >= 1/2 and is then reported non-finite.
FluxResult hemisphere_flux(const HalfBallProfile& U, double delta, double K, double p);

struct Prop2Row {
  double M = 0;
  double delta = 0;
  double Bpp = 0;
  double closed_form = 0;  // -((n-2s)^2/4) M |S^2| B(3/2, 1/2) = -2 pi^2 M
  double rel_error = 0;
};

struct Prop2Report {
  std::vector<Prop2Row> rows;
  double extrapolated = 0;  // Richardson limit of Bpp as delta -> 0
  double closed_form = 0;
  double rel_deviation = 0;
};

// Evaluates the flux limit across the delta sweep (decreasing) and compares
// the extrapolated value with -2 pi^2 M.
Prop2Report prop2_check(double M, const AmbientPolynomial& alpha, const std::vector<double>& deltas);

// Rows: (M, alpha id, delta, Bpp, closed form, relative error).
void write_prop2_report(std::ostream& os, const Prop2Report& report, const std::string& alpha_id);

}  // namespace nir3
