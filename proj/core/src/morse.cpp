#include "nir3/morse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "nir3/bubbles.hpp"
#include "nir3/sym_eig.hpp"

namespace nir3 {

namespace {

// One Riemannian Newton run; returns true when the gradient is driven to
// (near) machine zero.
bool newton_to_critical(const AmbientPolynomial& K, SpherePoint& p, double grad_tol) {
  for (int it = 0; it < 80; ++it) {
    const SphereDerivatives d = sphere_derivatives(K, p);
    const auto frame = tangent_frame(p);
    double g[3];
    for (int a = 0; a < 3; ++a) g[a] = dot(d.gradient, frame[a]);
    const double gn = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
    if (gn <= grad_tol) return true;

    // Solve H s = -g by the 3x3 eigen-decomposition; regularize tiny modes.
    const SymEigResult eig = sym_eig(std::vector<double>(d.hessian.begin(), d.hessian.end()), 3);
    double s[3] = {0, 0, 0};
    double floor = 0;
    for (double ev : eig.eigenvalues) floor = std::max(floor, std::abs(ev));
    floor = std::max(floor * 1e-12, 1e-300);
    for (int a = 0; a < 3; ++a) {
      double ga = 0;
      for (int r = 0; r < 3; ++r) ga += eig.eigenvectors[r * 3 + a] * g[r];
      const double ev = eig.eigenvalues[a];
      const double coef = std::abs(ev) > floor ? -ga / ev : 0.0;
      for (int r = 0; r < 3; ++r) s[r] += coef * eig.eigenvectors[r * 3 + a];
    }
    double sn = std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
    if (sn == 0.0) return false;
    const double cap = 0.4;
    if (sn > cap) {
      for (double& v : s) v *= cap / sn;
      sn = cap;
    }
    Vec4 step = s[0] * frame[0] + s[1] * frame[1] + s[2] * frame[2];
    Vec4 q = p.vec() + step;
    const double n = norm(q);
    p = SpherePoint((1.0 / n) * q);
    if (sn < 1e-15) {
      const SphereDerivatives dd = sphere_derivatives(K, p);
      const Vec4 gg = dd.gradient;
      return norm(gg) <= grad_tol;
    }
  }
  const SphereDerivatives d = sphere_derivatives(K, p);
  return norm(d.gradient) <= grad_tol;
}

CriticalPointRecord make_record(const AmbientPolynomial& K, const SpherePoint& p, double tol_hess,
                                double tol_lap) {
  CriticalPointRecord rec;
  rec.location = p;
  const SphereDerivatives d = sphere_derivatives(K, p);
  rec.grad_norm = norm(d.gradient);
  rec.laplacian = d.laplacian;
  rec.k_value = d.value;
  const SymEigResult eig = sym_eig(std::vector<double>(d.hessian.begin(), d.hessian.end()), 3);
  for (int i = 0; i < 3; ++i) rec.hessian_eigs[i] = eig.eigenvalues[i];
  rec.morse_index = 0;
  rec.hessian_degenerate = false;
  for (double ev : eig.eigenvalues) {
    if (std::abs(ev) <= tol_hess) rec.hessian_degenerate = true;
    if (ev < 0) ++rec.morse_index;
  }
  if (rec.laplacian < -tol_lap) rec.cls = CriticalClass::kMinus;
  else if (rec.laplacian > tol_lap) rec.cls = CriticalClass::kPlus;
  else rec.cls = CriticalClass::kDegenerate;
  return rec;
}

}  // namespace

std::vector<CriticalPointRecord> find_critical_points(const AmbientPolynomial& K, int n_starts,
                                                      std::uint64_t seed, const MorseTolerances& tols) {
  if (K.min_on_sphere_sampled() <= 0.0) {
    throw std::domain_error("find_critical_points: K must be positive on S^3");
  }
  const double tol_hess = tols.hess_rel * K.c2_sample_norm();
  std::vector<SpherePoint> found;
  for (const SpherePoint& start : low_discrepancy_points(n_starts, seed)) {
    SpherePoint p = start;
    if (!newton_to_critical(K, p, tols.grad)) continue;
    bool dup = false;
    for (const SpherePoint& q : found) {
      if (geodesic_distance(p, q) < 1e-6) {
        dup = true;
        break;
      }
    }
    if (!dup) found.push_back(p);
  }
  // Deterministic order: lexicographic by coordinates.
  std::sort(found.begin(), found.end(), [](const SpherePoint& a, const SpherePoint& b) {
    for (int i = 0; i < 4; ++i) {
      if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
  });
  std::vector<CriticalPointRecord> records;
  records.reserve(found.size());
  for (const SpherePoint& p : found) records.push_back(make_record(K, p, tol_hess, tols.lap));
  return records;
}

InteractionMatrix build_matrix_M(const std::vector<CriticalPointRecord>& points,
                                 const AmbientPolynomial& K, const MorseTolerances& tols) {
  const int k = static_cast<int>(points.size());
  if (k < 1) throw std::invalid_argument("build_matrix_M: at least one point required");
  for (const CriticalPointRecord& r : points) {
    if (r.laplacian > tols.lap) {
      throw std::invalid_argument("build_matrix_M: a point of cal-K^+ (positive Laplacian) was passed");
    }
  }
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      if (geodesic_distance(points[i].location, points[j].location) < 1e-9) {
        throw std::domain_error("build_matrix_M: coincident points");
      }
    }
  }
  InteractionMatrix M;
  M.points = points;
  M.k = k;
  M.entries.assign(static_cast<std::size_t>(k) * k, 0.0);
  for (int i = 0; i < k; ++i) {
    const double Ki = points[i].k_value;
    M.entries[i * k + i] = -points[i].laplacian / (Ki * Ki * Ki);
    for (int j = i + 1; j < k; ++j) {
      const double g = greens_function(points[i].location, points[j].location);
      const double v = -6.0 * g / (Ki * points[j].k_value);
      M.entries[i * k + j] = v;
      M.entries[j * k + i] = v;
    }
  }
  M.mu_min = sym_eig_min(M.entries, k);
  // Rayleigh bound sanity: mu(M) <= min over diagonals.
  double min_diag = M.entries[0];
  for (int i = 1; i < k; ++i) min_diag = std::min(min_diag, M.entries[i * k + i]);
  if (M.mu_min > min_diag + 1e-9 * (1.0 + std::abs(min_diag))) {
    throw std::runtime_error("build_matrix_M: eigen solve violated the Rayleigh diagonal bound");
  }
  return M;
}

namespace {

double matrix_scale(const InteractionMatrix& M) {
  double s = 0;
  for (double v : M.entries) s = std::max(s, std::abs(v));
  return s;
}

std::vector<CriticalPointRecord> select(const std::vector<CriticalPointRecord>& pts,
                                        const std::vector<int>& all, const std::vector<int>& subset) {
  std::vector<CriticalPointRecord> out;
  out.reserve(subset.size());
  for (int i : subset) out.push_back(pts[all[i]]);
  return out;
}

}  // namespace

DegreeReport degree_report_from_points(const std::vector<CriticalPointRecord>& points,
                                       const AmbientPolynomial& K, const MorseTolerances& tols) {
  DegreeReport rep;
  rep.critical_points = points;
  rep.morse_ok = true;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].hessian_degenerate) rep.morse_ok = false;
    if (points[i].cls == CriticalClass::kMinus) rep.k_minus.push_back(static_cast<int>(i));
    if (points[i].cls != CriticalClass::kPlus) rep.k_nonplus.push_back(static_cast<int>(i));
  }
  if (!rep.morse_ok) {
    rep.warnings.push_back("Morse assumption violated: a critical point has a near-zero Hessian eigenvalue");
    return rep;
  }
  const int s = static_cast<int>(rep.k_minus.size());
  if (s > 20) throw std::runtime_error("index_of_K: more than 20 points in cal-K^- (subset guard)");
  if (static_cast<int>(rep.k_nonplus.size()) > 20) {
    throw std::runtime_error("index_of_K: more than 20 points in cal-K minus cal-K^+ (subset guard)");
  }

  rep.margin_lap = std::numeric_limits<double>::infinity();
  for (const CriticalPointRecord& r : points) rep.margin_lap = std::min(rep.margin_lap, std::abs(r.laplacian));
  rep.margin_mu = std::numeric_limits<double>::infinity();

  // All nonempty subsets of cal-K^- in canonical order (size, then lexicographic).
  rep.index = -1;
  std::vector<std::vector<int>> by_size(static_cast<std::size_t>(s) + 1);
  for (unsigned mask = 1; mask < (1u << s); ++mask) {
    std::vector<int> subset;
    for (int b = 0; b < s; ++b) {
      if (mask & (1u << b)) subset.push_back(b);
    }
    const InteractionMatrix M = build_matrix_M(select(points, rep.k_minus, subset), K, tols);
    const double tol_mu = tols.mu_rel * std::max(matrix_scale(M), 1e-300);
    SubsetRecord sr;
    sr.indices = subset;
    sr.mu = M.mu_min;
    sr.positive = M.mu_min > tol_mu;
    sr.near_degenerate = std::abs(M.mu_min) <= 10.0 * tol_mu;
    if (sr.near_degenerate) {
      rep.warnings.push_back("near-degenerate mu(M) for a subset of cal-K^- (within 10 tol_mu)");
    }
    if (subset.size() >= 2) rep.margin_mu = std::min(rep.margin_mu, std::abs(M.mu_min));
    if (sr.positive) {
      int isum = 0;
      for (int b : subset) isum += points[rep.k_minus[b]].morse_index;
      sr.sign = ((static_cast<int>(subset.size()) - 1 + isum) % 2 == 0) ? 1 : -1;
      rep.index += sr.sign;
    }
    rep.subsets.push_back(std::move(sr));
  }
  std::stable_sort(rep.subsets.begin(), rep.subsets.end(), [](const SubsetRecord& a, const SubsetRecord& b) {
    if (a.indices.size() != b.indices.size()) return a.indices.size() < b.indices.size();
    return a.indices < b.indices;
  });

  // Near-null configurations over cal-K minus cal-K^+.
  const int m = static_cast<int>(rep.k_nonplus.size());
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    std::vector<int> subset;
    for (int b = 0; b < m; ++b) {
      if (mask & (1u << b)) subset.push_back(b);
    }
    const InteractionMatrix M = build_matrix_M(select(points, rep.k_nonplus, subset), K, tols);
    const double tol_mu = tols.mu_rel * std::max(matrix_scale(M), 1e-300);
    if (std::abs(M.mu_min) <= tol_mu) {
      std::vector<int> global;
      for (int b : subset) global.push_back(rep.k_nonplus[b]);
      rep.h_configs.push_back(std::move(global));
    }
  }

  // Admissibility: Lap K != 0 on cal-K and mu != 0 on k >= 2 subsets of cal-K^-.
  bool mu_ok = true;
  for (const SubsetRecord& sr : rep.subsets) {
    if (sr.indices.size() >= 2) {
      const InteractionMatrix M = build_matrix_M(select(points, rep.k_minus, sr.indices), K, tols);
      const double tol_mu = tols.mu_rel * std::max(matrix_scale(M), 1e-300);
      if (std::abs(sr.mu) <= tol_mu) mu_ok = false;
    }
  }
  rep.in_A = rep.margin_lap > tols.lap && mu_ok;

  // Closed-form criterion: pairwise Lap Lap < 9 K K over cal-K^-.
  rep.corollary_holds = true;
  for (std::size_t a = 0; a < rep.k_minus.size() && rep.corollary_holds; ++a) {
    for (std::size_t b = a + 1; b < rep.k_minus.size(); ++b) {
      const CriticalPointRecord& P = points[rep.k_minus[a]];
      const CriticalPointRecord& Q = points[rep.k_minus[b]];
      if (!(P.laplacian * Q.laplacian < 9.0 * P.k_value * Q.k_value)) {
        rep.corollary_holds = false;
        break;
      }
    }
  }
  rep.corollary_index = -1;
  for (int i : rep.k_minus) rep.corollary_index += (points[i].morse_index % 2 == 0) ? 1 : -1;
  rep.corollary_agrees = !rep.corollary_holds || rep.corollary_index == rep.index;
  return rep;
}

DegreeReport index_of_K(const AmbientPolynomial& K, int n_starts, std::uint64_t seed,
                        const MorseTolerances& tols) {
  return degree_report_from_points(find_critical_points(K, n_starts, seed, tols), K, tols);
}

void write_degree_report(std::ostream& os, const DegreeReport& rep) {
  os.precision(16);
  os << "degree report\n";
  os << "critical_points " << rep.critical_points.size() << "\n";
  for (std::size_t i = 0; i < rep.critical_points.size(); ++i) {
    const CriticalPointRecord& r = rep.critical_points[i];
    const char* cls = r.cls == CriticalClass::kMinus ? "K_MINUS"
                      : r.cls == CriticalClass::kPlus ? "K_PLUS"
                                                      : "DEGENERATE";
    os << "  point " << i << " loc " << r.location[0] << " " << r.location[1] << " " << r.location[2]
       << " " << r.location[3] << " K " << r.k_value << " lap " << r.laplacian << " index "
       << r.morse_index << " class " << cls << " grad_norm " << r.grad_norm
       << (r.hessian_degenerate ? " HESSIAN_DEGENERATE" : "") << "\n";
  }
  os << "morse_ok " << (rep.morse_ok ? 1 : 0) << "\n";
  os << "K_minus";
  for (int i : rep.k_minus) os << " " << i;
  os << "\n";
  os << "subsets " << rep.subsets.size() << "\n";
  for (const SubsetRecord& sr : rep.subsets) {
    os << "  {";
    for (std::size_t i = 0; i < sr.indices.size(); ++i) os << (i ? "," : "") << rep.k_minus[sr.indices[i]];
    os << "} mu " << sr.mu << " counted " << (sr.positive ? 1 : 0) << " sign " << sr.sign
       << (sr.near_degenerate ? " NEAR_DEGENERATE" : "") << "\n";
  }
  os << "index " << rep.index << "\n";
  os << "in_A " << (rep.in_A ? 1 : 0) << " margin_lap " << rep.margin_lap << " margin_mu " << rep.margin_mu
     << "\n";
  os << "H_configs " << rep.h_configs.size() << "\n";
  for (const auto& cfg : rep.h_configs) {
    os << "  {";
    for (std::size_t i = 0; i < cfg.size(); ++i) os << (i ? "," : "") << cfg[i];
    os << "}\n";
  }
  os << "corollary_holds " << (rep.corollary_holds ? 1 : 0) << " corollary_index " << rep.corollary_index
     << " agrees " << (rep.corollary_agrees ? 1 : 0) << "\n";
  for (const std::string& w : rep.warnings) os << "warning " << w << "\n";
}

}  // namespace nir3
