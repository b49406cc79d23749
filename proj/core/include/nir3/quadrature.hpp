#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "nir3/sphere.hpp"

// Quadrature rules and the product grid carrying the S^3 measure.

namespace nir3 {

// Gauss-Legendre rule on [-1, 1]; exact for polynomial degree <= 2n-1.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int n);

// Gauss rule for int_{-1}^{1} f(z) sqrt(1-z^2) dz (Chebyshev, second kind):
//   z_k = cos(k pi/(n+1)), w_k = pi/(n+1) sin^2(k pi/(n+1)).
// This is the chi rule: int_0^pi g(cos chi) sin^2(chi) dchi.
GaussRule gauss_chebyshev2(int n);

// Product quadrature grid on S^3. Nodes/weights integrate every
// hyperspherical harmonic of degree <= order exactly (weights sum to 2pi^2).
// Construction: Chebyshev-II nodes in chi, Gauss-Legendre in cos theta,
// uniform phi.
class QuadratureGrid {
 public:
  // Grid of order >= 2L+1, node count O(L^3).
  static std::shared_ptr<const QuadratureGrid> build(int L);
  // Grid exact through harmonic degree >= `order`.
  static std::shared_ptr<const QuadratureGrid> build_order(int order);

  int order() const { return order_; }
  std::uint64_t id() const { return id_; }
  std::size_t size() const { return nodes_.size(); }

  const std::vector<SpherePoint>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  // Angular factorization (chi outer, theta middle, phi inner).
  int n_chi() const { return n_chi_; }
  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }
  const GaussRule& chi_rule() const { return chi_; }
  const GaussRule& theta_rule() const { return theta_; }
  double phi_node(int p) const;
  double phi_weight() const;
  // Flat node index of (c, t, p).
  std::size_t index(int c, int t, int p) const {
    return (static_cast<std::size_t>(c) * n_theta_ + t) * n_phi_ + p;
  }

 private:
  QuadratureGrid() = default;
  int order_ = 0;
  int n_chi_ = 0, n_theta_ = 0, n_phi_ = 0;
  GaussRule chi_, theta_;
  std::vector<SpherePoint> nodes_;
  std::vector<double> weights_;
  std::uint64_t id_ = 0;
};

// Adaptive 1-D quadrature of f on [a, b]: panel bisection with embedded
// Gauss 8/16 error estimate. Throws on non-convergence at max depth.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double abs_floor = 1e-14, int max_depth = 48);

// Adaptive 2-D quadrature of f on [ax,bx] x [ay,by] (tensor Gauss 8 vs 16
// error estimate, recursive quartering). `seeds_x` lists x-locations where
// panels are pre-split (peak refinement).
double integrate_adaptive_2d(const std::function<double(double, double)>& f, double ax, double bx,
                             double ay, double by, double rel_tol, const std::vector<double>& seeds_x = {},
                             const std::vector<double>& seeds_y = {}, double abs_floor = 1e-14,
                             int max_depth = 30);

}  // namespace nir3
