#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nir3/morse.hpp"
#include "nir3/polynomial.hpp"
#include "nir3/reduced.hpp"
#include "nir3/spectral.hpp"

// Newton/continuation solver for the subcritical equation
//   P_sigma v = K |v|^{1-tau} v   on S^3
// in the degree-theoretic form (well defined when iterates dip negative),
// and extraction of blow-up diagnostics along branches.

namespace nir3 {

struct SolverOptions {
  double rtol = 1e-9;      // residual L2 relative to ||K v^2||_{L^2}
  int max_newton = 50;
  double armijo_c = 1e-4;
  int max_krylov = 250;
  double krylov_tol = 1e-12;
  int dense_max_modes = 1000;  // dense Jacobian assembly below this size (3-D)
  bool force_dense = false;
  bool force_iterative = false;
};

struct SolverState {
  double tau = 0;
  HarmonicSpectrum v;
  double residual_norm = 0;  // L2 norm of the residual spectrum
  double rhs_norm = 0;       // ||K |v|^{1-tau} v||_{L2}
  int newton_iters = 0;
  bool positive = false;  // min over grid > 0
  bool converged = false;
  int L = 0;
  std::string note;
};

// Spectrum of P_sigma v - K |v|^{1-tau} v, nonlinearity evaluated on a
// dealiased grid (order >= 3L).
HarmonicSpectrum residual(const HarmonicSpectrum& v, double tau, const AmbientPolynomial& K);

// Damped Newton with linearization P_sigma - (2-tau) K |v|^{1-tau}: dense
// solves in spectral space for small mode counts, otherwise GMRES
// preconditioned by P_sigma^{-1}. Throws on a singular Jacobian
// (bifurcation suspect); returns best effort with converged=false when the
// iteration stalls.
SolverState newton_solve(const HarmonicSpectrum& v0, double tau, const AmbientPolynomial& K,
                         const SolverOptions& opts = {});

// Same Newton in the zonal subspace about `axis` (one coefficient per
// degree, dense solves, L up to 4096). K must be invariant under rotations
// about the axis (verified by sampling).
SolverState axisym_solve(const AmbientPolynomial& K, const SpherePoint& axis, double tau,
                         const HarmonicSpectrum& v0, const SolverOptions& opts = {});

// Energy I_tau(v) = 1/2 <v,v> - 1/(3-tau) int K |v|^{3-tau} and its pairing
// with a direction w (both computed on the dealiased grid).
double energy(const HarmonicSpectrum& v, double tau, const AmbientPolynomial& K);
double energy_pairing(const HarmonicSpectrum& v, const HarmonicSpectrum& w, double tau,
                      const AmbientPolynomial& K);

struct PeakInfo {
  SpherePoint location;
  double height = 0;        // m
  double tau_m_sq = 0;      // tau m^2
  double lambda_hat = 0;    // K(q)^{-1} m_1/m_j
  double profile_error = 0; // sup_{d <= 3/m} |v(exp d)/m - (1 + K(q)^2 m^2 tan^2(d/2))^{-1}|
  int nearest_critical = -1;
  double nearest_distance = 0;
  bool concentrating = false;  // t_est sqrt(tau) above threshold
};

struct BlowupDiagnostics {
  std::vector<PeakInfo> peaks;  // sorted by height descending
  bool resolution_ok = true;    // estimated rate within L/4
  double t_estimate = 0;        // m K(q) at the tallest peak
};

BlowupDiagnostics diagnostics(const SolverState& state, const AmbientPolynomial& K, int expected_k,
                              const std::vector<CriticalPointRecord>& critical_points = {});

struct BranchPoint {
  SolverState state;
  BlowupDiagnostics diag;
  DecomposeResult fit;   // single-bubble decomposition (k = 1 branches)
  bool fit_valid = false;
};

struct ContinuationResult {
  std::vector<BranchPoint> points;
  bool aborted_resolution = false;
  double largest_trustworthy_tau = 0;  // when aborted for resolution
  std::string note;
};

// Warm-started Newton over a geometric tau schedule from tau_start down to
// tau_end. Step failures bisect the tau step (down to a floor) before the
// branch stops. A branch aborts with a resolution note when the fitted rate
// exceeds L/4.
ContinuationResult continuation(double tau_start, double tau_end, int n_steps,
                                const AmbientPolynomial& K, const SolverState& branch_init,
                                const SolverOptions& opts = {},
                                const std::vector<CriticalPointRecord>& critical_points = {});

// One row per tau: tau, residual, min v, peak data, fitted (alpha,t,P),
// remainder norm. Deterministic formatting.
void write_branch_csv(std::ostream& os, const ContinuationResult& branch);

}  // namespace nir3
