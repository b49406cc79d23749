#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nir3/bubbles.hpp"
#include "nir3/morse.hpp"
#include "nir3/spectral.hpp"

// Finite-dimensional reduction: the reduced energy gradient, the convex rate
// potential F and its unique critical point, blow-up predictions, and the
// decomposition of a field into bubbles plus an orthogonal remainder.

namespace nir3 {

struct ReducedConfig {
  std::vector<SpherePoint> points;
  std::vector<double> k_values;    // K(P_i)
  std::vector<double> laplacians;  // Lap K(P_i)
  double tau = 0.01;
  std::vector<double> alphas;
  std::vector<double> rates;  // t_i
  double window_A = 16.0;     // rates must satisfy A^{-1} tau^{-1/2} < t < A tau^{-1/2}
  double eps0 = 0.75;         // |alpha_i - 1/K(P_i)| < eps0

  int k() const { return static_cast<int>(points.size()); }
  void validate() const;  // throws on a violated invariant
};

ReducedConfig make_reduced_config(const std::vector<CriticalPointRecord>& points,
                                  const AmbientPolynomial& K, double tau);

struct ReducedGradient {
  std::vector<double> d_alpha;    // -|S^3| beta_i
  std::vector<double> d_rate;     // tau-, Laplacian- and interaction-driven terms
  std::vector<Vec4> d_location;   // -Gamma6 grad K(P_i), ambient tangent vectors
  std::string alpha_budget;       // symbolic remainder orders
  std::string rate_budget;
  std::string location_budget;
  double rate_budget_estimate = 0;  // numeric magnitude of the rate remainder
};

ReducedGradient reduced_gradient(const ReducedConfig& cfg, const AmbientPolynomial& K,
                                 double remainder_norm);

struct BlowupPrediction {
  double tau = 0;
  double c_mu = 0.25;              // constant in  sum_l M_lj lambda_l = c_mu lambda_j mu_j
  std::vector<double> t_star;      // critical rates
  std::vector<double> mu_pred;     // predicted lim tau v(q_j)^2
  std::vector<double> lambda;      // lambda_j, normalized so lambda_1 K_1 = 1
  std::vector<double> s_star;      // minimizer of F (s = 1/t)
  double f_value = 0;
  double hessian_min_eig = 0;      // of the F Hessian at the minimizer
  bool hessian_pd = false;
  int newton_iters = 0;
};

// Minimizes F(s) = -sum_j (4 tau/K_j^2) log s_j
//                  + 1/2 sum_i (M_ii s_i^2 + sum_j M_ij s_i s_j)
// over s > 0 by damped Newton in log coordinates. Requires mu(M) > 0.
// `initial` optionally overrides the default start (used by restart tests).
BlowupPrediction solve_F_critical(const std::vector<CriticalPointRecord>& points,
                                  const AmbientPolynomial& K, double tau, double c_mu = 0.25,
                                  const std::vector<double>* initial = nullptr);

struct DecomposeResult {
  ReducedConfig fit;
  HarmonicSpectrum remainder;
  double remainder_norm = 0;  // H^{1/2} norm
  bool converged = false;
  int iters = 0;
};

struct DecomposeOptions {
  int max_iters = 60;
  double grad_tol = 1e-12;  // on the normal-equation gradient, relative
};

// Least-squares fit of sum alpha_i delta_{P_i,t_i} in the H^{1/2} inner
// product; at the optimum the remainder is orthogonal to the bubbles and
// their t- and P-derivatives. The full-spectrum variant moves (alpha, t, P);
// the zonal variant moves (alpha, t) with P at the spectrum's pole (location
// stationarity holds by symmetry).
DecomposeResult decompose_solution(const HarmonicSpectrum& v, int k, const ReducedConfig& init,
                                   const AmbientPolynomial& K,
                                   std::shared_ptr<const QuadratureGrid> grid = nullptr,
                                   const DecomposeOptions& opts = {});

void write_prediction(std::ostream& os, const BlowupPrediction& p);

}  // namespace nir3
