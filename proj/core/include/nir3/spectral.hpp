#pragma once

#include <cmath>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "nir3/constants.hpp"
#include "nir3/quadrature.hpp"
#include "nir3/sphere.hpp"

// Hyperspherical-harmonic analysis/synthesis on S^3 and the diagonal
// operators built on top of it.
//
// Basis convention (id "nir3-real-v1"), frozen:
//   Y_{l,m,j}(chi,theta,phi) = R_{l,m}(chi) * S_{m,j}(theta,phi),
//     0 <= m <= l, -m <= j <= m,
//   R_{l,m} = N_{l,m} sin^m(chi) C_{l-m}^{(m+1)}(cos chi), normalized so
//     int_0^pi R^2 sin^2 chi dchi = 1,
//   S_{m,j} = real orthonormal S^2 harmonics (cos for j>0, sin for j<0).
// Eigenvalues: -Lap Y_l = l(l+2) Y_l.
//
// Intra-degree ordering: m ascending, j = -m..m; block offset of degree l is
// l(l+1)(2l+1)/6, block size (l+1)^2.
//
// The operator with multiplier l+1 is the conformal half-Laplacian P_{1/2}:
// -Lap eigenvalue l(l+2) gives B = sqrt(l(l+2)+1) = l+1, and the Gamma-ratio
// Gamma(B+1)/Gamma(B) collapses to B, i.e. to l+1.

namespace nir3 {

inline constexpr const char* kBasisConventionId = "nir3-real-v1";

inline std::size_t spectrum_size(int L) {
  return static_cast<std::size_t>(L + 1) * (L + 2) * (2 * L + 3) / 6;
}
inline std::size_t degree_offset(int l) { return static_cast<std::size_t>(l) * (l + 1) * (2 * l + 1) / 6; }
inline std::size_t intra_degree_index(int m, int j) { return static_cast<std::size_t>(m) * m + (j + m); }

// Degree-indexed coefficients. `zonal` spectra hold one coefficient per
// degree (the m=0, j=0 modes about `pole`); full spectra hold (l+1)^2 per
// degree and are always referred to the standard axes.
struct HarmonicSpectrum {
  int L = 0;
  bool zonal = false;
  SpherePoint pole;  // meaningful for zonal spectra only
  std::vector<double> coeffs;

  static HarmonicSpectrum zeros(int L);
  static HarmonicSpectrum zonal_zeros(int L, const SpherePoint& pole = SpherePoint());

  std::size_t size() const { return coeffs.size(); }
  double l2_norm() const;

  HarmonicSpectrum& operator+=(const HarmonicSpectrum& o);
  HarmonicSpectrum& operator-=(const HarmonicSpectrum& o);
  HarmonicSpectrum& operator*=(double s);
};

// Values at the nodes of a quadrature grid.
struct SphericalField {
  std::shared_ptr<const QuadratureGrid> grid;
  std::vector<double> values;

  SphericalField() = default;
  SphericalField(std::shared_ptr<const QuadratureGrid> g, std::vector<double> v);

  double integral() const;  // sum w_i f_i
  double mean() const { return integral() / (2.0 * kPi * kPi); }
};

double min_value(const SphericalField& f);
SphericalField sample(const std::shared_ptr<const QuadratureGrid>& grid,
                      const std::function<double(const SpherePoint&)>& f);

// Cached per-(grid, L) tables for the separable transform stages
// (phi Fourier, theta associated Legendre, chi Gegenbauer).
class TransformPlan;
std::shared_ptr<const TransformPlan> make_plan(const std::shared_ptr<const QuadratureGrid>& grid, int L);

// Exact projection for band-limited inputs. Requires grid order >= 2L.
HarmonicSpectrum forward_transform(const SphericalField& f, int L);
SphericalField inverse_transform(const HarmonicSpectrum& s, const std::shared_ptr<const QuadratureGrid>& grid);

// Multiplies (or divides) each degree-l block by l+1.
HarmonicSpectrum apply_p_half(const HarmonicSpectrum& s, bool invert = false);
// Multiplies degree-l block by -l(l+2).
HarmonicSpectrum laplace_beltrami(const HarmonicSpectrum& s);

// H^{1/2} inner product <u,v> = int (P_sigma u) v = sum_l (l+1) u_l . v_l.
// Requires matching L and representation.
double hsigma_inner(const HarmonicSpectrum& u, const HarmonicSpectrum& v);
inline double hsigma_norm(const HarmonicSpectrum& u) { return std::sqrt(hsigma_inner(u, u)); }

// Zonal expansion of a function of geodesic distance from `pole`:
//   c_l = |S^2| int_0^pi g(chi) Z_l(chi) sin^2 chi dchi,
//   Z_l(chi) = sin((l+1)chi)/(sin chi sqrt(2 pi^2)).
// Integration is panel-adaptive toward chi = 0; integrable singularities up
// to nearly chi^-2 are handled, anything stronger fails with an error.
HarmonicSpectrum zonal_expand(const std::function<double(double)>& g, int L,
                              const SpherePoint& pole = SpherePoint());

// Value of the orthonormal zonal harmonic of degree l at distance chi.
double zonal_harmonic(int l, double chi);

// Single-harmonic and all-harmonics pointwise evaluation (full basis).
double eval_harmonic(int l, int m, int j, const SpherePoint& p);
double evaluate(const HarmonicSpectrum& s, const SpherePoint& p);

// Promote a zonal spectrum about `pole` to a full spectrum (pole must be a
// coordinate axis +-e4 for now; general poles go through grid resampling).
HarmonicSpectrum zonal_to_full(const HarmonicSpectrum& z);

// ---- zonal collocation (1-D chi grid) ----------------------------------

// Chebyshev-II nodes in cos chi with the S^3 zonal measure |S^2| sin^2 chi.
struct ZonalGrid {
  std::vector<double> chi;      // nodes in (0, pi)
  std::vector<double> weights;  // |S^2| * chebyshev-II weights
  static ZonalGrid build(int n_nodes);
};

// Dense synthesis/analysis against Z_l; exact round trip when the grid has
// more than L nodes.
std::vector<double> zonal_synthesize(const HarmonicSpectrum& z, const ZonalGrid& grid);
HarmonicSpectrum zonal_analyze(const std::vector<double>& values, const ZonalGrid& grid, int L,
                               const SpherePoint& pole = SpherePoint());

// ---- serialization ------------------------------------------------------

// Text table (l, intra-degree index, coefficient) with a versioned header
// carrying the basis convention id.
void save_spectrum(std::ostream& os, const HarmonicSpectrum& s);
HarmonicSpectrum load_spectrum(std::istream& is);

}  // namespace nir3
