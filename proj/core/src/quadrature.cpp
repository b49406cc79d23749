#include "nir3/quadrature.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nir3/constants.hpp"

namespace nir3 {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1 required");
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  // Newton iteration on P_n from the Chebyshev initial guess.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    r.nodes[i] = -z;
    r.nodes[n - 1 - i] = z;
    const double w = 2.0 / ((1.0 - z * z) * pp * pp);
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

GaussRule gauss_chebyshev2(int n) {
  if (n < 1) throw std::invalid_argument("gauss_chebyshev2: n >= 1 required");
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int k = 1; k <= n; ++k) {
    const double a = k * kPi / (n + 1);
    // Descending chi = ascending z = cos chi ordering is not required; keep
    // nodes ascending in z for consistency with gauss_legendre.
    r.nodes[n - k] = std::cos(a);
    r.weights[n - k] = kPi / (n + 1) * std::sin(a) * std::sin(a);
  }
  return r;
}

namespace {
std::atomic<std::uint64_t> g_grid_counter{1};

// Rough memory estimate used by the resource guard.
std::size_t grid_bytes(std::size_t nodes) { return nodes * (sizeof(SpherePoint) + sizeof(double)); }
}  // namespace

std::shared_ptr<const QuadratureGrid> QuadratureGrid::build(int L) {
  if (L < 1) throw std::invalid_argument("QuadratureGrid::build: L >= 1 required");
  return build_order(2 * L + 1);
}

std::shared_ptr<const QuadratureGrid> QuadratureGrid::build_order(int order) {
  if (order < 1) throw std::invalid_argument("QuadratureGrid::build_order: order >= 1 required");
  auto g = std::shared_ptr<QuadratureGrid>(new QuadratureGrid());
  g->order_ = order;
  g->n_chi_ = (order + 2) / 2;    // 2n-1 >= order
  g->n_theta_ = (order + 2) / 2;  // 2n-1 >= order
  g->n_phi_ = order + 1;          // uniform rule exact for |j| <= order
  const std::size_t n_nodes = static_cast<std::size_t>(g->n_chi_) * g->n_theta_ * g->n_phi_;
  constexpr std::size_t kMaxBytes = 2ull << 30;  // 2 GiB grid budget
  if (grid_bytes(n_nodes) > kMaxBytes) {
    throw std::runtime_error("QuadratureGrid: order " + std::to_string(order) + " needs about " +
                             std::to_string(grid_bytes(n_nodes) >> 20) +
                             " MiB of nodes which exceeds the 2048 MiB budget");
  }
  g->chi_ = gauss_chebyshev2(g->n_chi_);
  g->theta_ = gauss_legendre(g->n_theta_);
  g->nodes_.reserve(n_nodes);
  g->weights_.reserve(n_nodes);
  const double wphi = kTwoPi / g->n_phi_;
  for (int c = 0; c < g->n_chi_; ++c) {
    const double zc = g->chi_.nodes[c];
    const double sc = std::sqrt(1.0 - zc * zc);
    for (int t = 0; t < g->n_theta_; ++t) {
      const double zt = g->theta_.nodes[t];
      const double st = std::sqrt(1.0 - zt * zt);
      const double w = g->chi_.weights[c] * g->theta_.weights[t] * wphi;
      for (int p = 0; p < g->n_phi_; ++p) {
        const double phi = kTwoPi * p / g->n_phi_;
        g->nodes_.push_back(SpherePoint(sc * st * std::cos(phi), sc * st * std::sin(phi), sc * zt, zc));
        g->weights_.push_back(w);
      }
    }
  }
  g->id_ = g_grid_counter.fetch_add(1);
  return g;
}

double QuadratureGrid::phi_node(int p) const { return kTwoPi * p / n_phi_; }
double QuadratureGrid::phi_weight() const { return kTwoPi / n_phi_; }

namespace {

const double kG8Nodes[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
const double kG8Weights[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
const double kG16Nodes[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
                             0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
const double kG16Weights[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
                               0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

double gauss8(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0;
  for (int i = 0; i < 4; ++i) s += kG8Weights[i] * (f(c - h * kG8Nodes[i]) + f(c + h * kG8Nodes[i]));
  return s * h;
}

double gauss16(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0;
  for (int i = 0; i < 8; ++i) s += kG16Weights[i] * (f(c - h * kG16Nodes[i]) + f(c + h * kG16Nodes[i]));
  return s * h;
}

// Per-panel error budget halves with depth against a global L1 scale, so
// oscillatory integrands with zero-crossing panels still terminate.
double adapt1(const std::function<double(double)>& f, double a, double b, double tol, double budget,
              int depth, int max_depth) {
  const double coarse = gauss8(f, a, b);
  const double fine = gauss16(f, a, b);
  const double err = std::abs(fine - coarse);
  if (err <= tol * std::abs(fine) || err <= budget) return fine;
  if (depth >= max_depth) {
    throw std::runtime_error("integrate_adaptive: panel did not converge (singular integrand?)");
  }
  const double m = 0.5 * (a + b);
  return adapt1(f, a, m, tol, budget * 0.5, depth + 1, max_depth) +
         adapt1(f, m, b, tol, budget * 0.5, depth + 1, max_depth);
}

double gauss2d(const std::function<double(double, double)>& f, double ax, double bx, double ay, double by,
               int n) {
  const double* nodes = n == 8 ? kG8Nodes : kG16Nodes;
  const double* w = n == 8 ? kG8Weights : kG16Weights;
  const int h = n / 2;
  const double cx = 0.5 * (ax + bx), hx = 0.5 * (bx - ax);
  const double cy = 0.5 * (ay + by), hy = 0.5 * (by - ay);
  double s = 0;
  for (int i = 0; i < h; ++i) {
    for (int si = -1; si <= 1; si += 2) {
      const double x = cx + si * hx * nodes[i];
      double sy = 0;
      for (int j = 0; j < h; ++j) {
        sy += w[j] * (f(x, cy - hy * nodes[j]) + f(x, cy + hy * nodes[j]));
      }
      s += w[i] * sy;
    }
  }
  return s * hx * hy;
}

struct Panel {
  double ax, bx, ay, by;
  int depth;
};

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol,
                          double abs_floor, int max_depth) {
  // Global L1 scale from a coarse pass over a few panels.
  double l1 = 0;
  const auto absf = [&f](double x) { return std::abs(f(x)); };
  for (int i = 0; i < 8; ++i) {
    const double pa = a + (b - a) * i / 8.0;
    l1 += gauss16(absf, pa, pa + (b - a) / 8.0);
  }
  return adapt1(f, a, b, rel_tol, std::max(rel_tol * l1, abs_floor), 0, max_depth);
}

double integrate_adaptive_2d(const std::function<double(double, double)>& f, double ax, double bx,
                             double ay, double by, double rel_tol, const std::vector<double>& seeds_x,
                             const std::vector<double>& seeds_y, double abs_floor, int max_depth) {
  // Pre-split along seed locations so narrow peaks land on panel corners.
  std::vector<double> xs{ax, bx}, ys{ay, by};
  for (double s : seeds_x)
    if (s > ax && s < bx) xs.push_back(s);
  for (double s : seeds_y)
    if (s > ay && s < by) ys.push_back(s);
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());

  std::vector<Panel> stack;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) stack.push_back({xs[i], xs[i + 1], ys[j], ys[j + 1], 0});

  double total = 0;
  // First pass estimate for the relative tolerance scale.
  double scale = 0;
  for (const Panel& p : stack) scale += std::abs(gauss2d(f, p.ax, p.bx, p.ay, p.by, 8));
  scale = std::max(scale, abs_floor);

  while (!stack.empty()) {
    const Panel p = stack.back();
    stack.pop_back();
    const double coarse = gauss2d(f, p.ax, p.bx, p.ay, p.by, 8);
    const double fine = gauss2d(f, p.ax, p.bx, p.ay, p.by, 16);
    const double err = std::abs(fine - coarse);
    // Per-panel error share shrinks with depth so the accumulated error
    // stays near rel_tol * scale under quartering.
    const double share = rel_tol * scale * std::pow(0.25, p.depth) * 0.5;
    if (err <= share + abs_floor || err <= rel_tol * std::abs(fine)) {
      total += fine;
      continue;
    }
    if (p.depth >= max_depth) {
      throw std::runtime_error(
          "integrate_adaptive_2d: peak not resolved at max subdivision depth; "
          "a finer rule (higher order) is required");
    }
    const double mx = 0.5 * (p.ax + p.bx), my = 0.5 * (p.ay + p.by);
    stack.push_back({p.ax, mx, p.ay, my, p.depth + 1});
    stack.push_back({mx, p.bx, p.ay, my, p.depth + 1});
    stack.push_back({p.ax, mx, my, p.by, p.depth + 1});
    stack.push_back({mx, p.bx, my, p.by, p.depth + 1});
  }
  return total;
}

}  // namespace nir3
