#include "nir3/sym_eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nir3 {

namespace {

double hypot2(double a, double b) { return std::sqrt(a * a + b * b); }

// Householder reduction of a (row-major, symmetric) to tridiagonal form.
// On exit `a` holds the accumulated orthogonal transform Q, d the diagonal,
// e the subdiagonal (e[0] unused).
void tred2(std::vector<double>& a, int n, std::vector<double>& d, std::vector<double>& e) {
  for (int i = n - 1; i > 0; --i) {
    const int l = i - 1;
    double h = 0, scale = 0;
    if (l > 0) {
      for (int k = 0; k <= l; ++k) scale += std::abs(a[i * n + k]);
      if (scale == 0.0) {
        e[i] = a[i * n + l];
      } else {
        for (int k = 0; k <= l; ++k) {
          a[i * n + k] /= scale;
          h += a[i * n + k] * a[i * n + k];
        }
        double f = a[i * n + l];
        double g = f >= 0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        a[i * n + l] = f - g;
        f = 0;
        for (int j = 0; j <= l; ++j) {
          a[j * n + i] = a[i * n + j] / h;
          g = 0;
          for (int k = 0; k <= j; ++k) g += a[j * n + k] * a[i * n + k];
          for (int k = j + 1; k <= l; ++k) g += a[k * n + j] * a[i * n + k];
          e[j] = g / h;
          f += e[j] * a[i * n + j];
        }
        const double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = a[i * n + j];
          e[j] = g = e[j] - hh * f;
          for (int k = 0; k <= j; ++k) a[j * n + k] -= f * e[k] + g * a[i * n + k];
        }
      }
    } else {
      e[i] = a[i * n + l];
    }
    d[i] = h;
  }
  d[0] = 0;
  e[0] = 0;
  for (int i = 0; i < n; ++i) {
    const int l = i - 1;
    if (d[i] != 0.0) {
      for (int j = 0; j <= l; ++j) {
        double g = 0;
        for (int k = 0; k <= l; ++k) g += a[i * n + k] * a[k * n + j];
        for (int k = 0; k <= l; ++k) a[k * n + j] -= g * a[k * n + i];
      }
    }
    d[i] = a[i * n + i];
    a[i * n + i] = 1.0;
    for (int j = 0; j <= l; ++j) a[j * n + i] = a[i * n + j] = 0.0;
  }
}

// Implicit-shift QL on the tridiagonal (d, e); z accumulates eigenvectors.
void tql2(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z, int n) {
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= 1e-300 || std::abs(e[m]) <= 2.3e-16 * dd) break;
      }
      if (m != l) {
        if (++iter == 50) throw std::runtime_error("sym_eig: QL failed to converge in 50 iterations");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = hypot2(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0 ? std::abs(r) : -std::abs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        for (int i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = hypot2(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (int k = 0; k < n; ++k) {
            f = z[k * n + i + 1];
            z[k * n + i + 1] = s * z[k * n + i] + c * f;
            z[k * n + i] = c * z[k * n + i] - s * f;
          }
        }
        if (r == 0.0 && m - 1 >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace

SymEigResult sym_eig(const std::vector<double>& a_in, int n) {
  if (n < 1 || a_in.size() != static_cast<std::size_t>(n) * n) {
    throw std::invalid_argument("sym_eig: bad dimensions");
  }
  SymEigResult out;
  if (n == 1) {
    out.eigenvalues = {a_in[0]};
    out.eigenvectors = {1.0};
    return out;
  }
  std::vector<double> z = a_in;
  // Symmetrize from the lower triangle.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) z[i * n + j] = z[j * n + i];
  std::vector<double> d(n, 0.0), e(n, 0.0);
  tred2(z, n, d, e);
  tql2(d, e, z, n);
  // Sort ascending, permute eigenvector columns accordingly.
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int i, int j) { return d[i] < d[j]; });
  out.eigenvalues.resize(n);
  out.eigenvectors.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int c = 0; c < n; ++c) {
    out.eigenvalues[c] = d[idx[c]];
    for (int r = 0; r < n; ++r) out.eigenvectors[r * n + c] = z[r * n + idx[c]];
  }
  return out;
}

double sym_eig_min(const std::vector<double>& a, int n) { return sym_eig(a, n).eigenvalues.front(); }

}  // namespace nir3
