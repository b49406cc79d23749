#include "nir3/spectral.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "nir3/constants.hpp"

namespace nir3 {

namespace {

// Fully normalized associated Legendre q_m^j with int_{-1}^{1} q^2 dz = 1.
// Fills q[m] for m in [j, L] at fixed order j.
void legendre_column(int j, int L, double z, double* q) {
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  double qjj = std::sqrt(0.5);
  for (int m = 1; m <= j; ++m) qjj *= std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
  if (j <= L) q[j] = qjj;
  if (j + 1 <= L) q[j + 1] = std::sqrt(2.0 * j + 3.0) * z * qjj;
  for (int m = j + 2; m <= L; ++m) {
    const double a = std::sqrt(((2.0 * m - 1.0) * (2.0 * m + 1.0)) / ((m - j) * (double)(m + j)));
    const double b = std::sqrt(((2.0 * m + 1.0) * (m - 1.0 + j) * (m - 1.0 - j)) /
                               ((2.0 * m - 3.0) * (m - j) * (double)(m + j)));
    q[m] = a * z * q[m - 1] - b * q[m - 2];
  }
}

// Normalization of R_{l,m}: N^2 = n! (n+m+1) Gamma(m+1)^2 2^{1+2m} / (pi Gamma(n+2m+2)).
double radial_norm(int l, int m) {
  const int n = l - m;
  const double ln = std::lgamma(n + 1.0) + std::log(n + m + 1.0) + 2.0 * std::lgamma(m + 1.0) +
                    (1.0 + 2.0 * m) * std::log(2.0) - std::log(kPi) - std::lgamma(n + 2.0 * m + 2.0);
  return std::exp(0.5 * ln);
}

// R_{l,m}(chi) for l in [m, L] at fixed m; z = cos chi. Gegenbauer ascent
//   (n+1) C_{n+1} = 2(n+alpha) z C_n - (n+2alpha-1) C_{n-1}, alpha = m+1.
void radial_column(int m, int L, double z, double* r) {
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double alpha = m + 1.0;
  const double sm = std::pow(s, m);
  double prev = 0.0, cur = 1.0;
  for (int n = 0; m + n <= L; ++n) {
    r[m + n] = radial_norm(m + n, m) * sm * cur;
    const double next = (2.0 * (n + alpha) * z * cur - (n + 2.0 * alpha - 1.0) * prev) / (n + 1.0);
    prev = cur;
    cur = next;
  }
}

}  // namespace

double zonal_harmonic(int l, double chi) {
  const double s = std::sin(chi);
  const double inv = 1.0 / std::sqrt(2.0 * kPi * kPi);
  if (std::abs(s) < 1e-9) {
    // sin((l+1)chi)/sin(chi) -> (l+1) cos((l+1)chi)/cos(chi) near 0 and pi.
    return inv * (l + 1.0) * std::cos((l + 1.0) * chi) / std::cos(chi);
  }
  return inv * std::sin((l + 1.0) * chi) / s;
}

double eval_harmonic(int l, int m, int j, const SpherePoint& p) {
  if (m < 0 || m > l || std::abs(j) > m) throw std::invalid_argument("eval_harmonic: need 0<=m<=l, |j|<=m");
  const HypersphericalCoords c = to_hyperspherical(p);
  std::vector<double> q(l + 1, 0.0), r(l + 1, 0.0);
  legendre_column(std::abs(j), m, std::cos(c.theta), q.data());
  radial_column(m, l, std::cos(c.chi), r.data());
  double phi_part;
  if (j == 0) phi_part = 1.0 / std::sqrt(kTwoPi);
  else if (j > 0) phi_part = std::cos(j * c.phi) / std::sqrt(kPi);
  else phi_part = std::sin(-j * c.phi) / std::sqrt(kPi);
  return r[l] * q[m] * phi_part;
}

HarmonicSpectrum HarmonicSpectrum::zeros(int L) {
  HarmonicSpectrum s;
  s.L = L;
  s.coeffs.assign(spectrum_size(L), 0.0);
  return s;
}

HarmonicSpectrum HarmonicSpectrum::zonal_zeros(int L, const SpherePoint& pole) {
  HarmonicSpectrum s;
  s.L = L;
  s.zonal = true;
  s.pole = pole;
  s.coeffs.assign(static_cast<std::size_t>(L) + 1, 0.0);
  return s;
}

double HarmonicSpectrum::l2_norm() const {
  double s = 0;
  for (double c : coeffs) s += c * c;
  return std::sqrt(s);
}

namespace {
void check_compatible(const HarmonicSpectrum& a, const HarmonicSpectrum& b, const char* who) {
  if (a.L != b.L || a.zonal != b.zonal) {
    throw std::invalid_argument(std::string(who) + ": spectra have mismatched L or representation");
  }
  if (a.zonal && geodesic_distance(a.pole, b.pole) > 1e-12) {
    throw std::invalid_argument(std::string(who) + ": zonal spectra about different poles");
  }
}
}  // namespace

HarmonicSpectrum& HarmonicSpectrum::operator+=(const HarmonicSpectrum& o) {
  check_compatible(*this, o, "HarmonicSpectrum::operator+=");
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += o.coeffs[i];
  return *this;
}

HarmonicSpectrum& HarmonicSpectrum::operator-=(const HarmonicSpectrum& o) {
  check_compatible(*this, o, "HarmonicSpectrum::operator-=");
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] -= o.coeffs[i];
  return *this;
}

HarmonicSpectrum& HarmonicSpectrum::operator*=(double s) {
  for (double& c : coeffs) c *= s;
  return *this;
}

SphericalField::SphericalField(std::shared_ptr<const QuadratureGrid> g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
  if (!grid) throw std::invalid_argument("SphericalField: null grid");
  if (values.size() != grid->size()) {
    throw std::invalid_argument("SphericalField: value count does not match the paired grid");
  }
}

double SphericalField::integral() const {
  double s = 0;
  const auto& w = grid->weights();
  for (std::size_t i = 0; i < values.size(); ++i) s += w[i] * values[i];
  return s;
}

double min_value(const SphericalField& f) {
  double m = f.values.empty() ? 0.0 : f.values[0];
  for (double v : f.values) m = std::min(m, v);
  return m;
}

SphericalField sample(const std::shared_ptr<const QuadratureGrid>& grid,
                      const std::function<double(const SpherePoint&)>& f) {
  std::vector<double> v;
  v.reserve(grid->size());
  for (const SpherePoint& p : grid->nodes()) v.push_back(f(p));
  return SphericalField(grid, std::move(v));
}

// ---- transform plan ------------------------------------------------------

class TransformPlan {
 public:
  TransformPlan(std::shared_ptr<const QuadratureGrid> grid, int L) : grid_(std::move(grid)), L_(L) {
    if (L_ < 0 || L_ > 96) throw std::invalid_argument("TransformPlan: L must be in [0, 96]");
    const int nc = grid_->n_chi(), nt = grid_->n_theta(), np = grid_->n_phi();
    cosj_.assign(static_cast<std::size_t>(L_ + 1) * np, 0.0);
    sinj_.assign(static_cast<std::size_t>(L_ + 1) * np, 0.0);
    for (int j = 0; j <= L_; ++j) {
      for (int p = 0; p < np; ++p) {
        const double a = j * grid_->phi_node(p);
        cosj_[j * np + p] = std::cos(a);
        sinj_[j * np + p] = std::sin(a);
      }
    }
    theta_tab_.assign(pair_count() * nt, 0.0);
    std::vector<double> col(L_ + 1);
    for (int t = 0; t < nt; ++t) {
      for (int j = 0; j <= L_; ++j) {
        legendre_column(j, L_, grid_->theta_rule().nodes[t], col.data());
        for (int m = j; m <= L_; ++m) theta_tab_[(pair_index(m, j)) * nt + t] = col[m];
      }
    }
    chi_tab_.assign(pair_count() * nc, 0.0);
    for (int c = 0; c < nc; ++c) {
      for (int m = 0; m <= L_; ++m) {
        radial_column(m, L_, grid_->chi_rule().nodes[c], col.data());
        for (int l = m; l <= L_; ++l) chi_tab_[(pair_index(l, m)) * nc + c] = col[l];
      }
    }
  }

  int L() const { return L_; }
  const QuadratureGrid& grid() const { return *grid_; }

  // (outer >= inner) pairs packed triangularly.
  std::size_t pair_index(int outer, int inner) const {
    return static_cast<std::size_t>(outer) * (outer + 1) / 2 + inner;
  }
  std::size_t pair_count() const { return static_cast<std::size_t>(L_ + 1) * (L_ + 2) / 2; }

  double cosj(int j, int p) const { return cosj_[static_cast<std::size_t>(j) * grid_->n_phi() + p]; }
  double sinj(int j, int p) const { return sinj_[static_cast<std::size_t>(j) * grid_->n_phi() + p]; }
  double theta_tab(int m, int j, int t) const {
    return theta_tab_[pair_index(m, j) * grid_->n_theta() + t];
  }
  double chi_tab(int l, int m, int c) const { return chi_tab_[pair_index(l, m) * grid_->n_chi() + c]; }

 private:
  std::shared_ptr<const QuadratureGrid> grid_;
  int L_;
  std::vector<double> cosj_, sinj_, theta_tab_, chi_tab_;
};

std::shared_ptr<const TransformPlan> make_plan(const std::shared_ptr<const QuadratureGrid>& grid, int L) {
  static std::mutex mu;
  static std::map<std::pair<std::uint64_t, int>, std::weak_ptr<const TransformPlan>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(grid->id(), L);
  if (auto it = cache.find(key); it != cache.end()) {
    if (auto sp = it->second.lock()) return sp;
  }
  auto plan = std::make_shared<const TransformPlan>(grid, L);
  cache[key] = plan;
  return plan;
}

HarmonicSpectrum forward_transform(const SphericalField& f, int L) {
  const auto& grid = *f.grid;
  if (grid.order() < 2 * L) {
    throw std::invalid_argument("forward_transform: grid order " + std::to_string(grid.order()) +
                                " under-resolved, order >= " + std::to_string(2 * L) + " required");
  }
  auto plan = make_plan(f.grid, L);
  const int nc = grid.n_chi(), nt = grid.n_theta(), np = grid.n_phi();
  const double wphi = grid.phi_weight();
  const double inv_sqrt_2pi = 1.0 / std::sqrt(kTwoPi);
  const double inv_sqrt_pi = 1.0 / std::sqrt(kPi);

  // Stage 1: phi sums -> a[(c,t), j], b[(c,t), j].
  std::vector<double> a(static_cast<std::size_t>(nc) * nt * (L + 1), 0.0);
  std::vector<double> b(static_cast<std::size_t>(nc) * nt * (L + 1), 0.0);
  for (int c = 0; c < nc; ++c) {
    for (int t = 0; t < nt; ++t) {
      const double* fv = f.values.data() + grid.index(c, t, 0);
      double* arow = a.data() + (static_cast<std::size_t>(c) * nt + t) * (L + 1);
      double* brow = b.data() + (static_cast<std::size_t>(c) * nt + t) * (L + 1);
      for (int j = 0; j <= L; ++j) {
        double sc = 0, ss = 0;
        for (int p = 0; p < np; ++p) {
          sc += fv[p] * plan->cosj(j, p);
          ss += fv[p] * plan->sinj(j, p);
        }
        arow[j] = wphi * sc * (j == 0 ? inv_sqrt_2pi : inv_sqrt_pi);
        brow[j] = wphi * ss * inv_sqrt_pi;
      }
    }
  }

  // Stage 2: theta sums -> A[c, (m,j)], B[c, (m,j)].
  const std::size_t npairs = plan->pair_count();
  std::vector<double> A(static_cast<std::size_t>(nc) * npairs, 0.0);
  std::vector<double> B(static_cast<std::size_t>(nc) * npairs, 0.0);
  const auto& wt = grid.theta_rule().weights;
  for (int c = 0; c < nc; ++c) {
    double* Arow = A.data() + static_cast<std::size_t>(c) * npairs;
    double* Brow = B.data() + static_cast<std::size_t>(c) * npairs;
    for (int t = 0; t < nt; ++t) {
      const double* arow = a.data() + (static_cast<std::size_t>(c) * nt + t) * (L + 1);
      const double* brow = b.data() + (static_cast<std::size_t>(c) * nt + t) * (L + 1);
      for (int m = 0; m <= L; ++m) {
        for (int j = 0; j <= m; ++j) {
          const double q = plan->theta_tab(m, j, t) * wt[t];
          Arow[plan->pair_index(m, j)] += q * arow[j];
          if (j > 0) Brow[plan->pair_index(m, j)] += q * brow[j];
        }
      }
    }
  }

  // Stage 3: chi sums -> coefficients.
  HarmonicSpectrum out = HarmonicSpectrum::zeros(L);
  const auto& wc = grid.chi_rule().weights;
  for (int c = 0; c < nc; ++c) {
    const double* Arow = A.data() + static_cast<std::size_t>(c) * npairs;
    const double* Brow = B.data() + static_cast<std::size_t>(c) * npairs;
    for (int l = 0; l <= L; ++l) {
      double* block = out.coeffs.data() + degree_offset(l);
      for (int m = 0; m <= l; ++m) {
        const double r = plan->chi_tab(l, m, c) * wc[c];
        for (int j = 0; j <= m; ++j) {
          block[intra_degree_index(m, j)] += r * Arow[plan->pair_index(m, j)];
          if (j > 0) block[intra_degree_index(m, -j)] += r * Brow[plan->pair_index(m, j)];
        }
      }
    }
  }
  return out;
}

SphericalField inverse_transform(const HarmonicSpectrum& s,
                                 const std::shared_ptr<const QuadratureGrid>& grid) {
  if (s.zonal) {
    return inverse_transform(zonal_to_full(s), grid);
  }
  auto plan = make_plan(grid, s.L);
  const int L = s.L;
  const int nc = grid->n_chi(), nt = grid->n_theta(), np = grid->n_phi();
  const std::size_t npairs = plan->pair_count();
  const double inv_sqrt_2pi = 1.0 / std::sqrt(kTwoPi);
  const double inv_sqrt_pi = 1.0 / std::sqrt(kPi);

  // Stage 3': A[c, (m,j)] = sum_l R_{l,m}(chi_c) coeff(l,m,j).
  std::vector<double> A(static_cast<std::size_t>(nc) * npairs, 0.0);
  std::vector<double> B(static_cast<std::size_t>(nc) * npairs, 0.0);
  for (int c = 0; c < nc; ++c) {
    double* Arow = A.data() + static_cast<std::size_t>(c) * npairs;
    double* Brow = B.data() + static_cast<std::size_t>(c) * npairs;
    for (int l = 0; l <= L; ++l) {
      const double* block = s.coeffs.data() + degree_offset(l);
      for (int m = 0; m <= l; ++m) {
        const double r = plan->chi_tab(l, m, c);
        for (int j = 0; j <= m; ++j) {
          Arow[plan->pair_index(m, j)] += r * block[intra_degree_index(m, j)];
          if (j > 0) Brow[plan->pair_index(m, j)] += r * block[intra_degree_index(m, -j)];
        }
      }
    }
  }

  // Stage 2': a[(c,t), j] = sum_m q_m^j(theta_t) A[c,(m,j)].
  std::vector<double> a(static_cast<std::size_t>(nc) * nt * (L + 1), 0.0);
  std::vector<double> b(static_cast<std::size_t>(nc) * nt * (L + 1), 0.0);
  for (int c = 0; c < nc; ++c) {
    const double* Arow = A.data() + static_cast<std::size_t>(c) * npairs;
    const double* Brow = B.data() + static_cast<std::size_t>(c) * npairs;
    for (int t = 0; t < nt; ++t) {
      double* arow = a.data() + (static_cast<std::size_t>(c) * nt + t) * (L + 1);
      double* brow = b.data() + (static_cast<std::size_t>(c) * nt + t) * (L + 1);
      for (int m = 0; m <= L; ++m) {
        for (int j = 0; j <= m; ++j) {
          const double q = plan->theta_tab(m, j, t);
          arow[j] += q * Arow[plan->pair_index(m, j)];
          if (j > 0) brow[j] += q * Brow[plan->pair_index(m, j)];
        }
      }
    }
  }

  // Stage 1': phi synthesis.
  std::vector<double> values(grid->size(), 0.0);
  for (int c = 0; c < nc; ++c) {
    for (int t = 0; t < nt; ++t) {
      const double* arow = a.data() + (static_cast<std::size_t>(c) * nt + t) * (L + 1);
      const double* brow = b.data() + (static_cast<std::size_t>(c) * nt + t) * (L + 1);
      double* fv = values.data() + grid->index(c, t, 0);
      for (int p = 0; p < np; ++p) {
        double v = arow[0] * inv_sqrt_2pi;
        for (int j = 1; j <= L; ++j) {
          v += (arow[j] * plan->cosj(j, p) + brow[j] * plan->sinj(j, p)) * inv_sqrt_pi;
        }
        fv[p] = v;
      }
    }
  }
  return SphericalField(grid, std::move(values));
}

namespace {
HarmonicSpectrum degree_multiplier(const HarmonicSpectrum& s, const std::function<double(int)>& mult) {
  HarmonicSpectrum out = s;
  if (s.zonal) {
    for (int l = 0; l <= s.L; ++l) out.coeffs[l] *= mult(l);
    return out;
  }
  for (int l = 0; l <= s.L; ++l) {
    const double f = mult(l);
    double* block = out.coeffs.data() + degree_offset(l);
    const std::size_t n = static_cast<std::size_t>(l + 1) * (l + 1);
    for (std::size_t i = 0; i < n; ++i) block[i] *= f;
  }
  return out;
}
}  // namespace

HarmonicSpectrum apply_p_half(const HarmonicSpectrum& s, bool invert) {
  return degree_multiplier(s, [invert](int l) { return invert ? 1.0 / (l + 1.0) : l + 1.0; });
}

HarmonicSpectrum laplace_beltrami(const HarmonicSpectrum& s) {
  return degree_multiplier(s, [](int l) { return -static_cast<double>(l) * (l + 2.0); });
}

double hsigma_inner(const HarmonicSpectrum& u, const HarmonicSpectrum& v) {
  check_compatible(u, v, "hsigma_inner");
  double s = 0;
  if (u.zonal) {
    for (int l = 0; l <= u.L; ++l) s += (l + 1.0) * u.coeffs[l] * v.coeffs[l];
    return s;
  }
  for (int l = 0; l <= u.L; ++l) {
    const double* a = u.coeffs.data() + degree_offset(l);
    const double* b = v.coeffs.data() + degree_offset(l);
    const std::size_t n = static_cast<std::size_t>(l + 1) * (l + 1);
    double d = 0;
    for (std::size_t i = 0; i < n; ++i) d += a[i] * b[i];
    s += (l + 1.0) * d;
  }
  return s;
}

HarmonicSpectrum zonal_expand(const std::function<double(double)>& g, int L, const SpherePoint& pole) {
  // The measure sin^2(chi) Z_l absorbs singularities up to nearly chi^{-2};
  // probe the strength first so anything stronger fails loudly instead of
  // polluting the quadrature.
  {
    const double g2 = std::abs(g(1e-2)), g3 = std::abs(g(1e-3)), g4 = std::abs(g(1e-4));
    if (g3 > 1e-280 && g4 > 1e-280) {
      const double p = std::log10(std::max(g3 / g2, g4 / g3));
      if (p > 2.3) {
        throw std::runtime_error(
            "zonal_expand: integration failure (singularity stronger than chi^-2 at the pole)");
      }
    }
  }
  HarmonicSpectrum out = HarmonicSpectrum::zonal_zeros(L, pole);
  // Near the pole, integrate in chi = c u^2: the substitution clusters nodes
  // where chi^{-2}-type kernels live and keeps the u-integrand smooth. The
  // chi floor dodges the 1-cos(chi) underflow for naively written kernels.
  constexpr double kSplit = 0.25;
  constexpr double kChiFloor = 1e-7;
  const GaussRule inner = gauss_legendre(96);
  const GaussRule inner_check = gauss_legendre(64);
  for (int l = 0; l <= L; ++l) {
    const auto integrand = [&](double chi) {
      return g(chi) * zonal_harmonic(l, chi) * std::sin(chi) * std::sin(chi);
    };
    const auto inner_sum = [&](const GaussRule& rule) {
      double s = 0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double u = 0.5 * (rule.nodes[i] + 1.0);
        const double chi = std::max(kSplit * u * u, kChiFloor);
        s += 0.5 * rule.weights[i] * integrand(chi) * 2.0 * kSplit * u;
      }
      return s;
    };
    const double near = inner_sum(inner);
    const double near_check = inner_sum(inner_check);
    double far;
    try {
      far = integrate_adaptive(integrand, kSplit, kPi, 1e-12, 1e-14);
    } catch (const std::runtime_error&) {
      throw std::runtime_error("zonal_expand: integration failure at degree " + std::to_string(l));
    }
    // 1e-7 sits just above the inherent 1-cos cancellation noise of naively
    // written chi^{-2} kernels; smooth kernels agree to machine precision.
    const double scale = std::abs(near) + std::abs(far) + 1e-12;
    if (std::abs(near - near_check) > 1e-7 * scale) {
      throw std::runtime_error("zonal_expand: integration failure at degree " + std::to_string(l) +
                               " (pole quadrature did not settle)");
    }
    out.coeffs[l] = kAreaS2 * (near + far);
  }
  return out;
}

HarmonicSpectrum zonal_to_full(const HarmonicSpectrum& z) {
  if (!z.zonal) return z;
  HarmonicSpectrum out = HarmonicSpectrum::zeros(z.L);
  const double d_north = geodesic_distance(z.pole, SpherePoint::axis(3));
  const bool north = d_north < 1e-12;
  const bool south = std::abs(d_north - kPi) < 1e-12;
  if (!north && !south) {
    throw std::invalid_argument("zonal_to_full: only poles +-e4 are supported");
  }
  for (int l = 0; l <= z.L; ++l) {
    const double sign = (north || l % 2 == 0) ? 1.0 : -1.0;
    out.coeffs[degree_offset(l)] = sign * z.coeffs[l];
  }
  return out;
}

double evaluate(const HarmonicSpectrum& s, const SpherePoint& p) {
  if (s.zonal) {
    const double chi = geodesic_distance(p, s.pole);
    double v = 0;
    for (int l = 0; l <= s.L; ++l) v += s.coeffs[l] * zonal_harmonic(l, chi);
    return v;
  }
  const HypersphericalCoords c = to_hyperspherical(p);
  const int L = s.L;
  const double zt = std::cos(c.theta), zc = std::cos(c.chi);
  // q_m^j for all pairs, R_{l,m} for all pairs.
  std::vector<double> q(static_cast<std::size_t>(L + 1) * (L + 2) / 2, 0.0);
  std::vector<double> col(L + 1);
  for (int j = 0; j <= L; ++j) {
    legendre_column(j, L, zt, col.data());
    for (int m = j; m <= L; ++m) q[static_cast<std::size_t>(m) * (m + 1) / 2 + j] = col[m];
  }
  std::vector<double> r(static_cast<std::size_t>(L + 1) * (L + 2) / 2, 0.0);
  for (int m = 0; m <= L; ++m) {
    radial_column(m, L, zc, col.data());
    for (int l = m; l <= L; ++l) r[static_cast<std::size_t>(l) * (l + 1) / 2 + m] = col[l];
  }
  const double inv_sqrt_2pi = 1.0 / std::sqrt(kTwoPi);
  const double inv_sqrt_pi = 1.0 / std::sqrt(kPi);
  double v = 0;
  for (int l = 0; l <= L; ++l) {
    const double* block = s.coeffs.data() + degree_offset(l);
    for (int m = 0; m <= l; ++m) {
      const double rq0 = r[static_cast<std::size_t>(l) * (l + 1) / 2 + m];
      for (int j = -m; j <= m; ++j) {
        const double coeff = block[intra_degree_index(m, j)];
        if (coeff == 0.0) continue;
        const double qq = q[static_cast<std::size_t>(m) * (m + 1) / 2 + std::abs(j)];
        double phi_part;
        if (j == 0) phi_part = inv_sqrt_2pi;
        else if (j > 0) phi_part = std::cos(j * c.phi) * inv_sqrt_pi;
        else phi_part = std::sin(-j * c.phi) * inv_sqrt_pi;
        v += coeff * rq0 * qq * phi_part;
      }
    }
  }
  return v;
}

ZonalGrid ZonalGrid::build(int n_nodes) {
  if (n_nodes < 1) throw std::invalid_argument("ZonalGrid::build: n_nodes >= 1");
  ZonalGrid g;
  g.chi.resize(n_nodes);
  g.weights.resize(n_nodes);
  for (int k = 1; k <= n_nodes; ++k) {
    const double a = k * kPi / (n_nodes + 1);
    g.chi[k - 1] = a;
    g.weights[k - 1] = kAreaS2 * kPi / (n_nodes + 1) * std::sin(a) * std::sin(a);
  }
  return g;
}

std::vector<double> zonal_synthesize(const HarmonicSpectrum& z, const ZonalGrid& grid) {
  if (!z.zonal) throw std::invalid_argument("zonal_synthesize: spectrum is not zonal");
  std::vector<double> v(grid.chi.size(), 0.0);
  const double inv = 1.0 / std::sqrt(2.0 * kPi * kPi);
  for (std::size_t i = 0; i < grid.chi.size(); ++i) {
    // Clenshaw-free direct sum via the sine recurrence.
    const double chi = grid.chi[i];
    const double s = std::sin(chi), c2 = 2.0 * std::cos(chi);
    double sk_1 = 0.0, sk = s;  // sin(0), sin(chi)
    double acc = 0.0;
    for (int l = 0; l <= z.L; ++l) {
      // sk = sin((l+1) chi)
      acc += z.coeffs[l] * sk;
      const double next = c2 * sk - sk_1;
      sk_1 = sk;
      sk = next;
    }
    v[i] = acc * inv / s;
  }
  return v;
}

HarmonicSpectrum zonal_analyze(const std::vector<double>& values, const ZonalGrid& grid, int L,
                               const SpherePoint& pole) {
  if (values.size() != grid.chi.size()) throw std::invalid_argument("zonal_analyze: size mismatch");
  if (static_cast<int>(grid.chi.size()) <= L) {
    throw std::invalid_argument("zonal_analyze: grid under-resolved, need more than L nodes");
  }
  HarmonicSpectrum out = HarmonicSpectrum::zonal_zeros(L, pole);
  const double inv = 1.0 / std::sqrt(2.0 * kPi * kPi);
  for (std::size_t i = 0; i < grid.chi.size(); ++i) {
    const double chi = grid.chi[i];
    const double s = std::sin(chi), c2 = 2.0 * std::cos(chi);
    const double f = values[i] * grid.weights[i] * inv / s;
    double sk_1 = 0.0, sk = s;
    for (int l = 0; l <= L; ++l) {
      out.coeffs[l] += f * sk;
      const double next = c2 * sk - sk_1;
      sk_1 = sk;
      sk = next;
    }
  }
  return out;
}

void save_spectrum(std::ostream& os, const HarmonicSpectrum& s) {
  os << "# nir3 spectrum v1\n";
  os << "# basis " << kBasisConventionId << "\n";
  os << "L " << s.L << "\n";
  os << "kind " << (s.zonal ? "zonal" : "full") << "\n";
  if (s.zonal) {
    os.precision(17);
    os << "pole " << s.pole[0] << " " << s.pole[1] << " " << s.pole[2] << " " << s.pole[3] << "\n";
  }
  os.precision(17);
  if (s.zonal) {
    for (int l = 0; l <= s.L; ++l) os << l << " 0 " << s.coeffs[l] << "\n";
    return;
  }
  for (int l = 0; l <= s.L; ++l) {
    const double* block = s.coeffs.data() + degree_offset(l);
    const std::size_t n = static_cast<std::size_t>(l + 1) * (l + 1);
    for (std::size_t i = 0; i < n; ++i) os << l << " " << i << " " << block[i] << "\n";
  }
}

HarmonicSpectrum load_spectrum(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# nir3 spectrum v1", 0) != 0) {
    throw std::runtime_error("load_spectrum: missing version header");
  }
  if (!std::getline(is, line) || line != std::string("# basis ") + kBasisConventionId) {
    throw std::runtime_error("load_spectrum: basis convention mismatch");
  }
  std::string tag, kind;
  int L = -1;
  is >> tag >> L;
  if (tag != "L" || L < 0) throw std::runtime_error("load_spectrum: bad L line");
  is >> tag >> kind;
  if (tag != "kind") throw std::runtime_error("load_spectrum: bad kind line");
  HarmonicSpectrum s;
  if (kind == "zonal") {
    double p0, p1, p2, p3;
    is >> tag >> p0 >> p1 >> p2 >> p3;
    if (tag != "pole") throw std::runtime_error("load_spectrum: bad pole line");
    s = HarmonicSpectrum::zonal_zeros(L, SpherePoint(p0, p1, p2, p3));
    for (int l = 0; l <= L; ++l) {
      int lr, ir;
      double c;
      is >> lr >> ir >> c;
      s.coeffs[lr] = c;
    }
    return s;
  }
  s = HarmonicSpectrum::zeros(L);
  for (int l = 0; l <= L; ++l) {
    const std::size_t n = static_cast<std::size_t>(l + 1) * (l + 1);
    for (std::size_t i = 0; i < n; ++i) {
      int lr;
      std::size_t ir;
      double c;
      if (!(is >> lr >> ir >> c)) throw std::runtime_error("load_spectrum: truncated table");
      s.coeffs[degree_offset(lr) + ir] = c;
    }
  }
  return s;
}

}  // namespace nir3
