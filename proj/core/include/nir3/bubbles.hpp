#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nir3/spectral.hpp"
#include "nir3/sphere.hpp"

// The standard bubble family
//   delta_{P,t}(x) = t / (1 + (t^2-1)/2 (1 - cos d(x,P))),
// its derivatives, H^{1/2} pairings, the Green kernel, and numeric
// validation of the two-bubble interaction asymptotics.

namespace nir3 {

struct BubbleParams {
  SpherePoint P;
  double t = 2.0;      // concentration rate, > 1 (t = 1 is the constant 1)
  double alpha = 1.0;  // amplitude, > 0

  BubbleParams() = default;
  BubbleParams(const SpherePoint& p, double t_, double alpha_ = 1.0);
};

enum class BubbleDeriv { kValue, kRate, kLocation };

// Closed-form value, d/dt, or location derivative along a unit tangent
// direction at P. For kLocation, `direction` must be tangent at P.
double eval_bubble(const BubbleParams& b, const SpherePoint& x, BubbleDeriv deriv = BubbleDeriv::kValue,
                   const Vec4& direction = Vec4{});

// Value/derivatives as functions of w = 1 - cos d for quadrature kernels.
double bubble_of_w(double t, double w);
double bubble_dt_of_w(double t, double w);

// Green kernel of the conformal half-Laplacian (unnormalized):
//   G_p(q) = 1/(1 - cos d(p,q)).  Symmetric; p == q is rejected.
double greens_function(const SpherePoint& p, const SpherePoint& q);

// Zonal coefficients of delta_{P,t} about its own pole are geometric:
//   c_l = sqrt(2 pi^2) * 4t/(t+1)^2 * r^l,  r = (t-1)/(t+1).
double bubble_zonal_coeff(double t, int l);
double bubble_zonal_coeff_dt(double t, int l);
HarmonicSpectrum bubble_zonal_spectrum(double t, int L, const SpherePoint& pole = SpherePoint());

// Exact H^{1/2} pairing of two bubbles,
//   <delta_{P,t}, delta_{Q,s}> = int delta_{P,t}^2 delta_{Q,s}
//                              = 8 pi^2 / E(t,s,d),
//   E = t/s + s/t + 2 + (t^2-1)(s^2-1)(1-cos d)/(2ts).
// Serves as the independent oracle for the interaction quadrature.
double bubble_pair_inner(double t, double s, double d);
double bubble_pair_inner_dt(double t, double s, double d);

// int_{S^3} delta_1^a delta_2^b by peak-refined 2-D quadrature (geodesic
// polar coordinates about P1, panels pre-split at both peaks). Throws a
// resolution error when a peak cannot be resolved.
double interaction_integral(const BubbleParams& b1, const BubbleParams& b2, double a, double b,
                            double rel_tol = 1e-8);

// d/dt1 of int delta_1^2 delta_2 (closed-form integrand, same quadrature).
double interaction_integral_dt1(const BubbleParams& b1, const BubbleParams& b2, double rel_tol = 1e-8);

// 1-D radial integrals of a single bubble:
//   int delta^q dmu  and  int crd^2 delta^q dmu  (crd = chart radius tan(d/2))
// and their t-derivatives.
double radial_bubble_integral(double t, double q, bool chart_sq_weight, double rel_tol = 1e-11);
double radial_bubble_integral_dt(double t, double q, bool chart_sq_weight, double rel_tol = 1e-11);

// ---- asymptotics validation ---------------------------------------------

// One evaluated point of a validated identity.
struct AsymptoticsSample {
  double tau = 0;
  double t1 = 0, t2 = 0;
  double separation = 0;  // geodesic distance between the poles
  double numeric = 0;
  double predicted = 0;   // leading-order value
  double ratio = 0;       // numeric/predicted (guarded)
  double remainder = 0;   // |numeric - predicted|
  bool ok = true;         // quadrature converged
};

struct AsymptoticsRecord {
  std::string identity;  // id, e.g. "a.2"
  std::vector<AsymptoticsSample> samples;
  double remainder_exponent = 0;  // log-log fit of remainder vs tau
  bool exponent_valid = false;
  bool order_only = false;    // identity states an order, not a constant
  bool inconclusive = false;  // some samples failed to integrate
};

struct AsymptoticsReport {
  std::vector<AsymptoticsRecord> records;
};

struct AsymptoticsConfig {
  std::vector<std::string> identities;  // subset of the known ids; empty = all
  std::vector<double> taus{0.04, 0.01, 0.0025};
  double separation = 1.5707963267948966;  // pi/2
  double rate_factor = 1.0;                // t = rate_factor * tau^{-1/2}
  double rel_tol = 1e-8;
};

// Known identity ids:
//   "a.2"           int delta1^2 delta2           ~ 4 pi |S^2| G/(t1 t2)
//   "a.3"           int delta1^{2-tau} delta2     = O(tau)
//   "a.1"           d/dt1 int delta1^2 delta2     ~ -4 pi |S^2| G/(t1^2 t2)
//   "part3-tau"     d/dt1 int delta1^{3-tau}      ~ -(tau/t1) (pi/2) |S^2|
//   "second-moment" int crd^2 delta1^{3-tau}      ~ (3 pi/2) |S^2| / t1^2
//   "a.5"           d/dt1 int crd^2 delta1^{3-tau} ~ -3 pi |S^2| / t1^3
// crd is the chart radius tan(d/2) (the identities hold in that chart).
AsymptoticsReport validate_asymptotics(const AsymptoticsConfig& config);

// Comma-separated table plus a structured summary block.
void write_asymptotics_csv(std::ostream& os, const AsymptoticsReport& report);
void write_asymptotics_summary(std::ostream& os, const AsymptoticsReport& report);

}  // namespace nir3
