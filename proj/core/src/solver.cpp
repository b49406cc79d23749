#include "nir3/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "nir3/bubbles.hpp"
#include "nir3/constants.hpp"

namespace nir3 {

namespace {

std::shared_ptr<const QuadratureGrid> dealiased_grid(int L) { return QuadratureGrid::build_order(3 * L + 1); }

std::vector<double> sample_poly(const AmbientPolynomial& K, const QuadratureGrid& grid) {
  std::vector<double> v;
  v.reserve(grid.size());
  for (const SpherePoint& p : grid.nodes()) v.push_back(K.eval(p.vec()));
  return v;
}

double grid_l2(const QuadratureGrid& grid, const std::vector<double>& vals) {
  double s = 0;
  for (std::size_t i = 0; i < vals.size(); ++i) s += grid.weights()[i] * vals[i] * vals[i];
  return std::sqrt(s);
}

// |v|^{1-tau} v, well defined through sign changes.
double signed_power(double v, double tau) { return std::pow(std::abs(v), 1.0 - tau) * v; }

// ---- zonal machinery -----------------------------------------------------

struct ZonalContext {
  SpherePoint axis;
  ZonalGrid grid;
  std::vector<double> K_vals;
  std::vector<double> Z;  // (n_nodes) x (L+1), row-major per node
  int L;

  double quad_l2(const std::vector<double>& vals) const {
    double s = 0;
    for (std::size_t i = 0; i < vals.size(); ++i) s += grid.weights[i] * vals[i] * vals[i];
    return std::sqrt(s);
  }
};

ZonalContext make_zonal_context(const AmbientPolynomial& K, const SpherePoint& axis, int L) {
  ZonalContext ctx;
  ctx.axis = axis;
  ctx.L = L;
  const int n = std::max(3 * L / 2 + 16, 48);
  ctx.grid = ZonalGrid::build(n);
  const auto frame = tangent_frame(axis);
  ctx.K_vals.resize(n);
  for (int i = 0; i < n; ++i) {
    const SpherePoint p = geodesic_step(axis, frame[0], ctx.grid.chi[i]);
    ctx.K_vals[i] = K.eval(p.vec());
  }
  ctx.Z.assign(static_cast<std::size_t>(n) * (L + 1), 0.0);
  for (int i = 0; i < n; ++i) {
    const double chi = ctx.grid.chi[i];
    const double s = std::sin(chi), c2 = 2.0 * std::cos(chi);
    const double inv = 1.0 / (std::sqrt(2.0 * kPi * kPi) * s);
    double sk_1 = 0.0, sk = s;
    for (int l = 0; l <= L; ++l) {
      ctx.Z[static_cast<std::size_t>(i) * (L + 1) + l] = sk * inv;
      const double next = c2 * sk - sk_1;
      sk_1 = sk;
      sk = next;
    }
  }
  return ctx;
}

void verify_zonal(const AmbientPolynomial& K, const SpherePoint& axis) {
  const auto frame = tangent_frame(axis);
  const double scale = std::max(K.c2_sample_norm(64), 1e-300);
  for (int i = 1; i <= 12; ++i) {
    const double chi = kPi * i / 13.0;
    const SpherePoint a = geodesic_step(axis, frame[0], chi);
    for (const Vec4& u : {frame[1], Vec4{0.5 * (frame[1] + frame[2])}}) {
      Vec4 uu = u;
      const double n = norm(uu);
      for (double& c : uu.x) c /= n;
      const SpherePoint b = geodesic_step(axis, uu, chi);
      if (std::abs(K.eval(a.vec()) - K.eval(b.vec())) > 1e-10 * scale) {
        throw std::invalid_argument("axisym_solve: K is not invariant under rotations about the axis");
      }
    }
  }
}

std::vector<double> zonal_values(const ZonalContext& ctx, const HarmonicSpectrum& v) {
  const int n = static_cast<int>(ctx.grid.chi.size());
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double* z = ctx.Z.data() + static_cast<std::size_t>(i) * (ctx.L + 1);
    double s = 0;
    for (int l = 0; l <= ctx.L; ++l) s += z[l] * v.coeffs[l];
    out[i] = s;
  }
  return out;
}

HarmonicSpectrum zonal_project(const ZonalContext& ctx, const std::vector<double>& vals) {
  HarmonicSpectrum out = HarmonicSpectrum::zonal_zeros(ctx.L, ctx.axis);
  const int n = static_cast<int>(ctx.grid.chi.size());
  for (int i = 0; i < n; ++i) {
    const double f = vals[i] * ctx.grid.weights[i];
    const double* z = ctx.Z.data() + static_cast<std::size_t>(i) * (ctx.L + 1);
    for (int l = 0; l <= ctx.L; ++l) out.coeffs[l] += f * z[l];
  }
  return out;
}

HarmonicSpectrum zonal_residual(const ZonalContext& ctx, const HarmonicSpectrum& v, double tau,
                                std::vector<double>* u_out, double* rhs_norm) {
  const std::vector<double> u = zonal_values(ctx, v);
  std::vector<double> N(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) N[i] = ctx.K_vals[i] * signed_power(u[i], tau);
  HarmonicSpectrum R = v;
  for (int l = 0; l <= ctx.L; ++l) R.coeffs[l] *= (l + 1.0);
  const HarmonicSpectrum Nf = zonal_project(ctx, N);
  for (int l = 0; l <= ctx.L; ++l) R.coeffs[l] -= Nf.coeffs[l];
  if (rhs_norm) *rhs_norm = ctx.quad_l2(N);
  if (u_out) *u_out = u;
  return R;
}

SolverState zonal_newton(const ZonalContext& ctx, double tau, const HarmonicSpectrum& v0,
                         const SolverOptions& opts) {
  SolverState st;
  st.tau = tau;
  st.L = ctx.L;
  st.v = v0;
  const int n = static_cast<int>(ctx.grid.chi.size());
  const int dim = ctx.L + 1;
  Eigen::MatrixXd J(dim, dim);
  std::vector<double> u;
  for (st.newton_iters = 0; st.newton_iters < opts.max_newton; ++st.newton_iters) {
    const HarmonicSpectrum R = zonal_residual(ctx, st.v, tau, &u, &st.rhs_norm);
    st.residual_norm = R.l2_norm();
    if (st.residual_norm <= opts.rtol * std::max(st.rhs_norm, 1e-300)) {
      st.converged = true;
      break;
    }
    // J = diag(l+1) - Z^T W diag((2-tau) K |u|^{1-tau}) Z
    J.setZero();
    for (int l = 0; l < dim; ++l) J(l, l) = l + 1.0;
    for (int i = 0; i < n; ++i) {
      const double q = (2.0 - tau) * ctx.K_vals[i] * std::pow(std::abs(u[i]), 1.0 - tau);
      const double wq = ctx.grid.weights[i] * q;
      const double* z = ctx.Z.data() + static_cast<std::size_t>(i) * dim;
      for (int a = 0; a < dim; ++a) {
        const double za = wq * z[a];
        for (int b = a; b < dim; ++b) J(a, b) -= za * z[b];
      }
    }
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < a; ++b) J(a, b) = J(b, a);

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
    const Eigen::MatrixXd& LU = lu.matrixLU();
    double pmax = 0, pmin = std::numeric_limits<double>::infinity();
    for (int a = 0; a < dim; ++a) {
      const double p = std::abs(LU(a, a));
      pmax = std::max(pmax, p);
      pmin = std::min(pmin, p);
    }
    if (!(pmin > 1e-14 * pmax)) {
      throw std::runtime_error("newton: Jacobian singular within tolerance (bifurcation suspect)");
    }
    Eigen::VectorXd rhs(dim);
    for (int l = 0; l < dim; ++l) rhs(l) = -R.coeffs[l];
    const Eigen::VectorXd dv = lu.solve(rhs);

    // Armijo on 1/2 ||R||^2; the Newton direction gives slope -||R||^2.
    const double phi0 = 0.5 * st.residual_norm * st.residual_norm;
    double step = 1.0;
    HarmonicSpectrum trial = st.v;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      for (int l = 0; l < dim; ++l) trial.coeffs[l] = st.v.coeffs[l] + step * dv(l);
      const HarmonicSpectrum Rt = zonal_residual(ctx, trial, tau, nullptr, nullptr);
      const double phit = 0.5 * Rt.l2_norm() * Rt.l2_norm();
      if (phit <= phi0 - opts.armijo_c * step * 2.0 * phi0) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      st.note = "line search stalled";
      break;
    }
    st.v = trial;
  }
  // Final bookkeeping.
  const HarmonicSpectrum R = zonal_residual(ctx, st.v, tau, &u, &st.rhs_norm);
  st.residual_norm = R.l2_norm();
  st.converged = st.residual_norm <= opts.rtol * std::max(st.rhs_norm, 1e-300);
  double umin = u.empty() ? 0.0 : u[0];
  for (double x : u) umin = std::min(umin, x);
  // Include the poles (not grid nodes).
  double p0 = 0, p1 = 0;
  for (int l = 0; l <= ctx.L; ++l) {
    const double zl0 = (l + 1.0) / std::sqrt(2.0 * kPi * kPi);
    p0 += st.v.coeffs[l] * zl0;
    p1 += st.v.coeffs[l] * zl0 * ((l % 2 == 0) ? 1.0 : -1.0);
  }
  umin = std::min({umin, p0, p1});
  st.positive = umin > 0;
  return st;
}

// ---- full-spectrum machinery ----------------------------------------------

struct FullContext {
  std::shared_ptr<const QuadratureGrid> grid;
  std::vector<double> K_vals;
  int L;
};

FullContext make_full_context(const AmbientPolynomial& K, int L) {
  FullContext ctx;
  ctx.L = L;
  ctx.grid = dealiased_grid(L);
  ctx.K_vals = sample_poly(K, *ctx.grid);
  return ctx;
}

HarmonicSpectrum full_residual(const FullContext& ctx, const HarmonicSpectrum& v, double tau,
                               std::vector<double>* u_out, double* rhs_norm) {
  const SphericalField u = inverse_transform(v, ctx.grid);
  std::vector<double> N(u.values.size());
  for (std::size_t i = 0; i < N.size(); ++i) N[i] = ctx.K_vals[i] * signed_power(u.values[i], tau);
  HarmonicSpectrum R = apply_p_half(v);
  const HarmonicSpectrum Nf = forward_transform(SphericalField(ctx.grid, N), ctx.L);
  R -= Nf;
  if (rhs_norm) *rhs_norm = grid_l2(*ctx.grid, N);
  if (u_out) *u_out = u.values;
  return R;
}

// w -> J w = P_sigma w - forward(q * synth(w)).
HarmonicSpectrum apply_jacobian(const FullContext& ctx, const std::vector<double>& q,
                                const HarmonicSpectrum& w) {
  const SphericalField ws = inverse_transform(w, ctx.grid);
  std::vector<double> qw(ws.values.size());
  for (std::size_t i = 0; i < qw.size(); ++i) qw[i] = q[i] * ws.values[i];
  HarmonicSpectrum out = apply_p_half(w);
  out -= forward_transform(SphericalField(ctx.grid, qw), ctx.L);
  return out;
}

// GMRES on the left-preconditioned system P^{-1} J x = P^{-1} b.
HarmonicSpectrum gmres_solve(const FullContext& ctx, const std::vector<double>& q,
                             const HarmonicSpectrum& b, const SolverOptions& opts) {
  const std::size_t n = b.coeffs.size();
  const int m = opts.max_krylov;
  HarmonicSpectrum r0 = apply_p_half(b, /*invert=*/true);
  const double beta = r0.l2_norm();
  HarmonicSpectrum x = HarmonicSpectrum::zeros(b.L);
  if (beta == 0.0) return x;

  std::vector<HarmonicSpectrum> V;
  V.reserve(m + 1);
  r0 *= 1.0 / beta;
  V.push_back(r0);
  std::vector<double> H(static_cast<std::size_t>(m + 1) * m, 0.0);
  std::vector<double> cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0);
  g[0] = beta;
  int used = 0;
  for (int j = 0; j < m; ++j) {
    HarmonicSpectrum w = apply_p_half(apply_jacobian(ctx, q, V[j]), /*invert=*/true);
    for (int i = 0; i <= j; ++i) {
      double h = 0;
      for (std::size_t a = 0; a < n; ++a) h += w.coeffs[a] * V[i].coeffs[a];
      H[i * m + j] = h;
      for (std::size_t a = 0; a < n; ++a) w.coeffs[a] -= h * V[i].coeffs[a];
    }
    const double hnext = w.l2_norm();
    H[(j + 1) * m + j] = hnext;
    // Givens sweep.
    for (int i = 0; i < j; ++i) {
      const double t = cs[i] * H[i * m + j] + sn[i] * H[(i + 1) * m + j];
      H[(i + 1) * m + j] = -sn[i] * H[i * m + j] + cs[i] * H[(i + 1) * m + j];
      H[i * m + j] = t;
    }
    const double denom = std::hypot(H[j * m + j], hnext);
    if (denom == 0.0) {
      used = j;
      break;
    }
    cs[j] = H[j * m + j] / denom;
    sn[j] = hnext / denom;
    H[j * m + j] = denom;
    g[j + 1] = -sn[j] * g[j];
    g[j] = cs[j] * g[j];
    used = j + 1;
    if (std::abs(g[j + 1]) <= opts.krylov_tol * beta) break;
    if (hnext == 0.0) break;
    w *= 1.0 / hnext;
    V.push_back(w);
  }
  if (used == 0) throw std::runtime_error("newton: GMRES breakdown (singular Jacobian suspect)");
  const double rel = std::abs(g[used]) / beta;
  if (rel > 1e-4) {
    throw std::runtime_error("newton: Jacobian solve stagnated (near-singular, bifurcation suspect)");
  }
  // Back substitution.
  std::vector<double> y(used, 0.0);
  for (int i = used - 1; i >= 0; --i) {
    double s = g[i];
    for (int j2 = i + 1; j2 < used; ++j2) s -= H[i * m + j2] * y[j2];
    y[i] = s / H[i * m + i];
  }
  for (int i = 0; i < used; ++i) {
    for (std::size_t a = 0; a < n; ++a) x.coeffs[a] += y[i] * V[i].coeffs[a];
  }
  return x;
}

HarmonicSpectrum dense_solve(const FullContext& ctx, const std::vector<double>& q,
                             const HarmonicSpectrum& b) {
  const int dim = static_cast<int>(b.coeffs.size());
  Eigen::MatrixXd J(dim, dim);
  HarmonicSpectrum e = HarmonicSpectrum::zeros(b.L);
  for (int c = 0; c < dim; ++c) {
    std::fill(e.coeffs.begin(), e.coeffs.end(), 0.0);
    e.coeffs[c] = 1.0;
    const HarmonicSpectrum col = apply_jacobian(ctx, q, e);
    for (int r = 0; r < dim; ++r) J(r, c) = col.coeffs[r];
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
  const Eigen::MatrixXd& LU = lu.matrixLU();
  double pmax = 0, pmin = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dim; ++a) {
    const double p = std::abs(LU(a, a));
    pmax = std::max(pmax, p);
    pmin = std::min(pmin, p);
  }
  if (!(pmin > 1e-14 * pmax)) {
    throw std::runtime_error("newton: Jacobian singular within tolerance (bifurcation suspect)");
  }
  Eigen::VectorXd rhs(dim);
  for (int r = 0; r < dim; ++r) rhs(r) = b.coeffs[r];
  const Eigen::VectorXd sol = lu.solve(rhs);
  HarmonicSpectrum out = HarmonicSpectrum::zeros(b.L);
  for (int r = 0; r < dim; ++r) out.coeffs[r] = sol(r);
  return out;
}

}  // namespace

HarmonicSpectrum residual(const HarmonicSpectrum& v, double tau, const AmbientPolynomial& K) {
  if (v.zonal) {
    verify_zonal(K, v.pole);
    const ZonalContext ctx = make_zonal_context(K, v.pole, v.L);
    return zonal_residual(ctx, v, tau, nullptr, nullptr);
  }
  const FullContext ctx = make_full_context(K, v.L);
  return full_residual(ctx, v, tau, nullptr, nullptr);
}

SolverState newton_solve(const HarmonicSpectrum& v0, double tau, const AmbientPolynomial& K,
                         const SolverOptions& opts) {
  if (!(tau > 0.0 && tau < 2.0)) throw std::invalid_argument("newton_solve: tau must lie in (0,2)");
  if (v0.zonal) return axisym_solve(K, v0.pole, tau, v0, opts);

  const FullContext ctx = make_full_context(K, v0.L);
  SolverState st;
  st.tau = tau;
  st.L = v0.L;
  st.v = v0;
  const bool dense = !opts.force_iterative &&
                     (opts.force_dense || st.v.coeffs.size() <= static_cast<std::size_t>(opts.dense_max_modes));
  std::vector<double> u;
  for (st.newton_iters = 0; st.newton_iters < opts.max_newton; ++st.newton_iters) {
    const HarmonicSpectrum R = full_residual(ctx, st.v, tau, &u, &st.rhs_norm);
    st.residual_norm = R.l2_norm();
    if (st.residual_norm <= opts.rtol * std::max(st.rhs_norm, 1e-300)) {
      st.converged = true;
      break;
    }
    std::vector<double> q(u.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
      q[i] = (2.0 - tau) * ctx.K_vals[i] * std::pow(std::abs(u[i]), 1.0 - tau);
    }
    HarmonicSpectrum rhs = R;
    rhs *= -1.0;
    const HarmonicSpectrum dv = dense ? dense_solve(ctx, q, rhs) : gmres_solve(ctx, q, rhs, opts);

    const double phi0 = 0.5 * st.residual_norm * st.residual_norm;
    double step = 1.0;
    bool accepted = false;
    HarmonicSpectrum trial = st.v;
    for (int ls = 0; ls < 30; ++ls) {
      for (std::size_t a = 0; a < trial.coeffs.size(); ++a) {
        trial.coeffs[a] = st.v.coeffs[a] + step * dv.coeffs[a];
      }
      const HarmonicSpectrum Rt = full_residual(ctx, trial, tau, nullptr, nullptr);
      const double phit = 0.5 * Rt.l2_norm() * Rt.l2_norm();
      if (phit <= phi0 - opts.armijo_c * step * 2.0 * phi0) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      st.note = "line search stalled";
      break;
    }
    st.v = trial;
  }
  const HarmonicSpectrum R = full_residual(ctx, st.v, tau, &u, &st.rhs_norm);
  st.residual_norm = R.l2_norm();
  st.converged = st.residual_norm <= opts.rtol * std::max(st.rhs_norm, 1e-300);
  double umin = u.empty() ? 0.0 : u[0];
  for (double x : u) umin = std::min(umin, x);
  st.positive = umin > 0;
  return st;
}

SolverState axisym_solve(const AmbientPolynomial& K, const SpherePoint& axis, double tau,
                         const HarmonicSpectrum& v0, const SolverOptions& opts) {
  if (!(tau > 0.0 && tau < 2.0)) throw std::invalid_argument("axisym_solve: tau must lie in (0,2)");
  if (!v0.zonal) throw std::invalid_argument("axisym_solve: v0 must be a zonal spectrum");
  if (geodesic_distance(v0.pole, axis) > 1e-12) {
    throw std::invalid_argument("axisym_solve: v0 must be zonal about the given axis");
  }
  verify_zonal(K, axis);
  const ZonalContext ctx = make_zonal_context(K, axis, v0.L);
  return zonal_newton(ctx, tau, v0, opts);
}

double energy(const HarmonicSpectrum& v, double tau, const AmbientPolynomial& K) {
  const double quad = 0.5 * hsigma_inner(v, v);
  double pot = 0;
  if (v.zonal) {
    const ZonalContext ctx = make_zonal_context(K, v.pole, v.L);
    const std::vector<double> u = zonal_values(ctx, v);
    for (std::size_t i = 0; i < u.size(); ++i) {
      pot += ctx.grid.weights[i] * ctx.K_vals[i] * std::pow(std::abs(u[i]), 3.0 - tau);
    }
  } else {
    const FullContext ctx = make_full_context(K, v.L);
    const SphericalField u = inverse_transform(v, ctx.grid);
    for (std::size_t i = 0; i < u.values.size(); ++i) {
      pot += ctx.grid->weights()[i] * ctx.K_vals[i] * std::pow(std::abs(u.values[i]), 3.0 - tau);
    }
  }
  return quad - pot / (3.0 - tau);
}

double energy_pairing(const HarmonicSpectrum& v, const HarmonicSpectrum& w, double tau,
                      const AmbientPolynomial& K) {
  double pair = hsigma_inner(v, w);
  if (v.zonal) {
    const ZonalContext ctx = make_zonal_context(K, v.pole, v.L);
    const std::vector<double> u = zonal_values(ctx, v);
    const std::vector<double> ws = zonal_values(ctx, w);
    for (std::size_t i = 0; i < u.size(); ++i) {
      pair -= ctx.grid.weights[i] * ctx.K_vals[i] * signed_power(u[i], tau) * ws[i];
    }
  } else {
    const FullContext ctx = make_full_context(K, v.L);
    const SphericalField u = inverse_transform(v, ctx.grid);
    const SphericalField ws = inverse_transform(w, ctx.grid);
    for (std::size_t i = 0; i < u.values.size(); ++i) {
      pair -= ctx.grid->weights()[i] * ctx.K_vals[i] * signed_power(u.values[i], tau) * ws.values[i];
    }
  }
  return pair;
}

// ---- diagnostics ----------------------------------------------------------

namespace {

// Peak refinement on the tangent chart by finite-difference Newton.
void refine_peak(const HarmonicSpectrum& v, SpherePoint& p, double& height) {
  const double h = 1e-4;
  for (int it = 0; it < 12; ++it) {
    const auto frame = tangent_frame(p);
    double g[3], H[9];
    const double f0 = evaluate(v, p);
    for (int a = 0; a < 3; ++a) {
      const double fp = evaluate(v, geodesic_step(p, frame[a], h));
      const double fm = evaluate(v, geodesic_step(p, frame[a], -h));
      g[a] = (fp - fm) / (2.0 * h);
      H[a * 3 + a] = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for (int a = 0; a < 3; ++a) {
      for (int b = a + 1; b < 3; ++b) {
        // Diagonal probe along (e_a+e_b)/sqrt(2): f'' = (H_aa + H_bb)/2 + H_ab.
        Vec4 dir = 0.7071067811865476 * (frame[a] + frame[b]);
        const double fpp = evaluate(v, geodesic_step(p, dir, h));
        const double fmm = evaluate(v, geodesic_step(p, dir, -h));
        H[a * 3 + b] = H[b * 3 + a] =
            (fpp - 2.0 * f0 + fmm) / (h * h) - 0.5 * H[a * 3 + a] - 0.5 * H[b * 3 + b];
      }
    }
    // Solve H s = -g (3x3, regularized toward descent of -v).
    Eigen::Matrix3d Hm;
    Eigen::Vector3d gm;
    for (int a = 0; a < 3; ++a) {
      gm(a) = g[a];
      for (int b = 0; b < 3; ++b) Hm(a, b) = H[a * 3 + b];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(Hm);
    Eigen::Vector3d ev = es.eigenvalues();
    for (int a = 0; a < 3; ++a) ev(a) = std::min(ev(a), -1e-8 * std::max(1.0, std::abs(f0)));
    const Eigen::Vector3d s = -(es.eigenvectors() * ev.cwiseInverse().asDiagonal() *
                                es.eigenvectors().transpose() * gm);
    double sn = s.norm();
    Eigen::Vector3d sc = s;
    if (sn > 0.2) sc *= 0.2 / sn;
    Vec4 step = sc(0) * frame[0] + sc(1) * frame[1] + sc(2) * frame[2];
    Vec4 q = p.vec() + step;
    p = SpherePoint((1.0 / norm(q)) * q);
    if (sn < 1e-12) break;
  }
  height = evaluate(v, p);
}

// 1-D zonal peak refinement in chi via the derivative series.
double zonal_deriv(const HarmonicSpectrum& v, double chi) {
  const double s = std::sin(chi), c = std::cos(chi);
  double acc = 0;
  const double inv = 1.0 / std::sqrt(2.0 * kPi * kPi);
  for (int l = 0; l <= v.L; ++l) {
    const double lp = l + 1.0;
    acc += v.coeffs[l] * inv * (lp * std::cos(lp * chi) * s - std::sin(lp * chi) * c) / (s * s);
  }
  return acc;
}

double zonal_value(const HarmonicSpectrum& v, double chi) {
  double acc = 0;
  const double inv = 1.0 / std::sqrt(2.0 * kPi * kPi);
  const double s = std::sin(chi);
  if (std::abs(s) < 1e-12) {
    for (int l = 0; l <= v.L; ++l) {
      const double sign = chi < 1.0 ? 1.0 : ((l % 2 == 0) ? 1.0 : -1.0);
      acc += v.coeffs[l] * inv * (l + 1.0) * sign;
    }
    return acc;
  }
  for (int l = 0; l <= v.L; ++l) acc += v.coeffs[l] * inv * std::sin((l + 1.0) * chi) / s;
  return acc;
}

}  // namespace

BlowupDiagnostics diagnostics(const SolverState& state, const AmbientPolynomial& K, int expected_k,
                              const std::vector<CriticalPointRecord>& critical_points) {
  BlowupDiagnostics out;
  const HarmonicSpectrum& v = state.v;
  std::vector<std::pair<SpherePoint, double>> candidates;

  if (v.zonal) {
    const int n = std::max(8 * v.L, 512);
    const auto frame = tangent_frame(v.pole);
    std::vector<double> vals(n + 1);
    for (int i = 0; i <= n; ++i) vals[i] = zonal_value(v, kPi * i / n);
    for (int i = 0; i <= n; ++i) {
      const bool left_ok = i == 0 || vals[i] >= vals[i - 1];
      const bool right_ok = i == n || vals[i] >= vals[i + 1];
      if (!(left_ok && right_ok)) continue;
      double chi = kPi * i / n;
      if (i > 0 && i < n) {
        // Newton on the derivative.
        for (int it = 0; it < 40; ++it) {
          const double d = zonal_deriv(v, chi);
          const double h = 1e-7;
          const double dd = (zonal_deriv(v, chi + h) - zonal_deriv(v, chi - h)) / (2.0 * h);
          if (std::abs(dd) < 1e-300) break;
          const double step = std::clamp(-d / dd, -0.5 * kPi / n, 0.5 * kPi / n);
          chi += step;
          chi = std::clamp(chi, 1e-12, kPi - 1e-12);
          if (std::abs(step) < 1e-14) break;
        }
      }
      const SpherePoint loc = chi < 1e-9 ? v.pole
                              : chi > kPi - 1e-9 ? SpherePoint(-1.0 * v.pole.vec())
                                                 : geodesic_step(v.pole, frame[0], chi);
      candidates.emplace_back(loc, zonal_value(v, chi));
    }
  } else {
    // Grid candidates, deduplicated by separation, then refined.
    auto grid = dealiased_grid(v.L);
    const SphericalField f = inverse_transform(v, grid);
    std::vector<std::size_t> order(f.values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return f.values[a] > f.values[b]; });
    const std::size_t want = static_cast<std::size_t>(std::max(expected_k + 2, 3));
    for (std::size_t idx : order) {
      const SpherePoint p = grid->nodes()[idx];
      bool too_close = false;
      for (const auto& c : candidates) {
        if (geodesic_distance(p, c.first) < 0.35) {
          too_close = true;
          break;
        }
      }
      if (too_close) continue;
      SpherePoint loc = p;
      double height = f.values[idx];
      refine_peak(v, loc, height);
      candidates.emplace_back(loc, height);
      if (candidates.size() >= want) break;
    }
  }

  std::sort(candidates.begin(), candidates.end(),
            [](const auto& a, const auto& b) { return a.second > b.second; });
  if (candidates.empty()) return out;
  const double m1 = candidates.front().second;
  const int keep = std::max(expected_k, 1);
  for (int i = 0; i < static_cast<int>(candidates.size()) && i < keep; ++i) {
    PeakInfo pk;
    pk.location = candidates[i].first;
    pk.height = candidates[i].second;
    pk.tau_m_sq = state.tau * pk.height * pk.height;
    const double Kq = K.eval(pk.location.vec());
    pk.lambda_hat = (1.0 / Kq) * m1 / pk.height;
    // Rescaled profile comparison out to d = 3/m.
    const double kprof = Kq * Kq;
    double worst = 0;
    if (pk.height > 0) {
      const auto frame = tangent_frame(pk.location);
      for (int s = 1; s <= 24; ++s) {
        const double d = 3.0 / pk.height * s / 24.0;
        if (d >= kPi) break;
        const double u = std::tan(0.5 * d);
        const double model = 1.0 / (1.0 + kprof * pk.height * pk.height * u * u);
        const double val = evaluate(v, geodesic_step(pk.location, frame[0], d)) / pk.height;
        worst = std::max(worst, std::abs(val - model));
      }
    }
    pk.profile_error = worst;
    for (std::size_t c = 0; c < critical_points.size(); ++c) {
      const double d = geodesic_distance(pk.location, critical_points[c].location);
      if (pk.nearest_critical < 0 || d < pk.nearest_distance) {
        pk.nearest_critical = static_cast<int>(c);
        pk.nearest_distance = d;
      }
    }
    const double t_est = pk.height * Kq;
    pk.concentrating = t_est * std::sqrt(state.tau) >= 0.2;
    out.peaks.push_back(pk);
  }
  out.t_estimate = m1 * K.eval(out.peaks.front().location.vec());
  out.resolution_ok = out.t_estimate <= state.L / 4.0 + 1e-9;
  return out;
}

ContinuationResult continuation(double tau_start, double tau_end, int n_steps,
                                const AmbientPolynomial& K, const SolverState& branch_init,
                                const SolverOptions& opts,
                                const std::vector<CriticalPointRecord>& critical_points) {
  if (!(tau_start > tau_end && tau_end > 0)) {
    throw std::invalid_argument("continuation: need tau_start > tau_end > 0");
  }
  if (n_steps < 1) throw std::invalid_argument("continuation: n_steps >= 1");
  ContinuationResult out;
  const double rho = std::pow(tau_end / tau_start, 1.0 / n_steps);

  HarmonicSpectrum v = branch_init.v;
  double tau_prev = tau_start;
  const auto solve_at = [&](double tau, const HarmonicSpectrum& guess) {
    return guess.zonal ? axisym_solve(K, guess.pole, tau, guess, opts) : newton_solve(guess, tau, K, opts);
  };

  for (int step = 0; step <= n_steps; ++step) {
    const double tau_target = step == 0 ? tau_start : tau_prev * rho;
    double lo = tau_prev;
    SolverState st;
    bool solved = false;
    double tau_at = tau_target;
    for (int bisect = 0; bisect <= 8 && !solved; ++bisect) {
      try {
        st = solve_at(tau_at, v);
      } catch (const std::exception& e) {
        st.converged = false;
        st.note = e.what();
      }
      if (st.converged && st.positive) {
        solved = true;
        if (tau_at > tau_target) {
          // A bisected intermediate succeeded: accept it as the new base
          // point and retry the target from there.
          v = st.v;
          lo = tau_at;
          tau_at = tau_target;
          solved = false;
          continue;
        }
        break;
      }
      // Failure: halve the step geometrically toward the last good tau.
      tau_at = std::sqrt(lo * tau_at);
      if (lo / tau_at < 1.0005) break;
    }
    if (!solved) {
      out.note = "branch stopped at tau = " + std::to_string(tau_prev) +
                 (st.note.empty() ? " (step failure)" : " (" + st.note + ")");
      if (!st.positive && st.converged) out.note += " [positivity lost]";
      break;
    }

    BranchPoint bp;
    bp.state = st;
    bp.diag = diagnostics(st, K, 1, critical_points);
    if (!bp.diag.peaks.empty() && bp.diag.peaks.front().concentrating) {
      try {
        ReducedConfig init;
        const PeakInfo& pk = bp.diag.peaks.front();
        init.points = {pk.location};
        const SphereDerivatives d = sphere_derivatives(K, pk.location);
        init.k_values = {d.value};
        init.laplacians = {d.laplacian};
        init.tau = st.tau;
        init.alphas = {1.0 / d.value};
        init.rates = {std::max(1.5, bp.diag.t_estimate)};
        bp.fit = decompose_solution(st.v, 1, init, K);
        bp.fit_valid = bp.fit.converged;
      } catch (const std::exception&) {
        bp.fit_valid = false;
      }
    }
    out.points.push_back(bp);

    const double t_fit = bp.fit_valid ? bp.fit.fit.rates[0] : bp.diag.t_estimate;
    if (t_fit > st.L / 4.0) {
      out.aborted_resolution = true;
      out.largest_trustworthy_tau = tau_prev;
      out.note = "resolution limit: fitted rate " + std::to_string(t_fit) + " exceeds L/4 = " +
                 std::to_string(st.L / 4.0) + "; largest trustworthy tau = " + std::to_string(tau_prev);
      break;
    }

    v = st.v;
    tau_prev = st.tau;
    if (st.tau <= tau_end * 1.0000001) break;
  }
  return out;
}

void write_branch_csv(std::ostream& os, const ContinuationResult& branch) {
  os << "# columns: tau (dimensionless subcritical offset), residual_l2 and rhs_l2 (L2 of the residual "
        "spectrum and of K|v|^{1-tau}v), positive (1 iff min v > 0 on the grid), peak location x1..x4 "
        "(unit vector), m (peak height), tau_m_sq (tau*m^2, the concentration invariant mu), lambda_hat "
        "(K^-1 m1/m), profile_err (sup deviation from the rescaled bubble profile), alpha_fit, t_fit "
        "(fitted concentration rate), pfit x1..x4, remainder_hsigma (H^1/2 norm of the fit remainder)\n";
  os << "tau,residual,rhs,positive,peak_x1,peak_x2,peak_x3,peak_x4,m,tau_m_sq,lambda_hat,profile_err,"
        "alpha_fit,t_fit,pfit_x1,pfit_x2,pfit_x3,pfit_x4,remainder_hsigma\n";
  os.precision(17);
  for (const BranchPoint& bp : branch.points) {
    const PeakInfo* pk = bp.diag.peaks.empty() ? nullptr : &bp.diag.peaks.front();
    os << bp.state.tau << "," << bp.state.residual_norm << "," << bp.state.rhs_norm << ",";
    // vmin is not stored on the state; recover the flag only.
    os << (bp.state.positive ? 1 : 0) << ",";
    if (pk) {
      os << pk->location[0] << "," << pk->location[1] << "," << pk->location[2] << "," << pk->location[3]
         << "," << pk->height << "," << pk->tau_m_sq << "," << pk->lambda_hat << "," << pk->profile_error
         << ",";
    } else {
      os << ",,,,,,,,";
    }
    if (bp.fit_valid) {
      const ReducedConfig& f = bp.fit.fit;
      os << f.alphas[0] << "," << f.rates[0] << "," << f.points[0][0] << "," << f.points[0][1] << ","
         << f.points[0][2] << "," << f.points[0][3] << "," << bp.fit.remainder_norm;
    } else {
      os << ",,,,,,";
    }
    os << "\n";
  }
  if (!branch.note.empty()) os << "# note: " << branch.note << "\n";
}

}  // namespace nir3
