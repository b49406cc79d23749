#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "nir3/polynomial.hpp"
#include "nir3/sphere.hpp"

// Critical-point analysis of the curvature K: the inventory of critical
// points, the interaction matrix M with its least eigenvalue mu(M), the
// degree Index(K), membership in the admissible class, and the near-null
// configuration list H(K).

namespace nir3 {

enum class CriticalClass { kPlus, kMinus, kDegenerate };

struct CriticalPointRecord {
  SpherePoint location;
  double grad_norm = 0;
  std::array<double, 3> hessian_eigs{0, 0, 0};  // intrinsic, ascending
  int morse_index = 0;                          // count of negative eigenvalues
  double laplacian = 0;
  double k_value = 0;
  CriticalClass cls = CriticalClass::kDegenerate;
  bool hessian_degenerate = false;  // some |eig| <= tol_hess
};

// The theory is dichotomous in signs, so class membership is reported with
// explicit margins rather than silently rounded.
struct MorseTolerances {
  double grad = 1e-10;
  double hess_rel = 1e-8;  // relative to the C^2 sample norm of K
  double lap = 1e-8;
  double mu_rel = 1e-8;  // relative to max |M_ij|
};

// Multi-start Riemannian Newton from deterministic low-discrepancy starts;
// duplicates merged within geodesic distance 1e-6. K must be positive on
// S^3 (checked by sampling). Records are sorted deterministically.
std::vector<CriticalPointRecord> find_critical_points(const AmbientPolynomial& K, int n_starts = 600,
                                                      std::uint64_t seed = 0,
                                                      const MorseTolerances& tols = {});

// k x k symmetric matrix over points of cal-K minus cal-K^+:
//   M_ii = -Lap K(q_i)/K(q_i)^3,  M_ij = -6 G_{q_i}(q_j)/(K(q_i) K(q_j)).
struct InteractionMatrix {
  std::vector<CriticalPointRecord> points;
  std::vector<double> entries;  // row-major k x k
  double mu_min = 0;            // smallest eigenvalue
  int k = 0;
};

InteractionMatrix build_matrix_M(const std::vector<CriticalPointRecord>& points,
                                 const AmbientPolynomial& K, const MorseTolerances& tols = {});

struct SubsetRecord {
  std::vector<int> indices;  // into the K_minus list, ascending
  double mu = 0;
  bool positive = false;        // mu > tol_mu
  int sign = 0;                 // (-1)^{k-1+sum i(q)} when counted, else 0
  bool near_degenerate = false; // |mu| <= 10 tol_mu
};

struct DegreeReport {
  std::vector<CriticalPointRecord> critical_points;
  std::vector<int> k_minus;          // indices into critical_points
  std::vector<int> k_nonplus;        // cal-K minus cal-K^+ indices
  std::vector<SubsetRecord> subsets; // all nonempty subsets of k_minus, canonical order
  int index = -1;                    // -1 + sum over mu>0 subsets of the signs
  bool morse_ok = false;
  bool in_A = false;
  double margin_lap = 0;  // min |Lap K| over cal-K
  double margin_mu = 0;   // min |mu| over k >= 2 subsets of cal-K^- (inf if none)
  std::vector<std::vector<int>> h_configs;  // subsets of k_nonplus with |mu| <= tol_mu
  bool corollary_holds = false;  // pairwise Lap Lap < 9 K K on cal-K^- (or #K^- <= 1)
  int corollary_index = 0;       // -1 + sum_{Lap<0} (-1)^{i(q)}
  bool corollary_agrees = true;  // enumeration == closed form when corollary_holds
  std::vector<std::string> warnings;
};

// Enumerates all nonempty subsets of cal-K^- (guard: at most 20 points) and
// assembles the full report. Throws if the Morse structure is violated.
DegreeReport index_of_K(const AmbientPolynomial& K, int n_starts = 600, std::uint64_t seed = 0,
                        const MorseTolerances& tols = {});

// Same, reusing an existing inventory.
DegreeReport degree_report_from_points(const std::vector<CriticalPointRecord>& points,
                                       const AmbientPolynomial& K, const MorseTolerances& tols = {});

// Structured text report; subsets listed in canonical sorted order.
void write_degree_report(std::ostream& os, const DegreeReport& report);

}  // namespace nir3
