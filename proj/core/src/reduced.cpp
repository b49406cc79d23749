#include "nir3/reduced.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "nir3/constants.hpp"
#include "nir3/sym_eig.hpp"

namespace nir3 {

void ReducedConfig::validate() const {
  const std::size_t n = points.size();
  if (k_values.size() != n || laplacians.size() != n || alphas.size() != n || rates.size() != n) {
    throw std::invalid_argument("ReducedConfig: inconsistent field lengths");
  }
  if (!(tau > 0)) throw std::invalid_argument("ReducedConfig: tau > 0 required");
  const double lo = 1.0 / (window_A * std::sqrt(tau));  // A^{-1} tau^{-1/2}
  const double hi = window_A / std::sqrt(tau);          // A tau^{-1/2}
  for (std::size_t i = 0; i < n; ++i) {
    const double t = rates[i];
    if (!(t > lo && t < hi)) {
      throw std::invalid_argument("ReducedConfig: rate t_" + std::to_string(i) +
                                  " outside the window (A^{-1} tau^{-1/2}, A tau^{-1/2})");
    }
    if (!(std::abs(alphas[i] - 1.0 / k_values[i]) < eps0)) {
      throw std::invalid_argument("ReducedConfig: alpha_" + std::to_string(i) +
                                  " outside the eps0 window about 1/K(P_i)");
    }
  }
}

ReducedConfig make_reduced_config(const std::vector<CriticalPointRecord>& points,
                                  const AmbientPolynomial& K, double tau) {
  (void)K;
  ReducedConfig cfg;
  cfg.tau = tau;
  for (const CriticalPointRecord& r : points) {
    cfg.points.push_back(r.location);
    cfg.k_values.push_back(r.k_value);
    cfg.laplacians.push_back(r.laplacian);
    cfg.alphas.push_back(1.0 / r.k_value);
    cfg.rates.push_back(1.0 / std::sqrt(tau));
  }
  return cfg;
}

ReducedGradient reduced_gradient(const ReducedConfig& cfg, const AmbientPolynomial& K,
                                 double remainder_norm) {
  cfg.validate();
  const int k = cfg.k();
  ReducedGradient g;
  g.d_alpha.resize(k);
  g.d_rate.resize(k);
  g.d_location.resize(k);
  double beta_max = 0;
  for (int i = 0; i < k; ++i) beta_max = std::max(beta_max, std::abs(cfg.alphas[i] - 1.0 / cfg.k_values[i]));
  for (int i = 0; i < k; ++i) {
    const double Ki = cfg.k_values[i];
    const double beta = cfg.alphas[i] - 1.0 / Ki;
    g.d_alpha[i] = -kVolS3 * beta;

    double dt = kRateGradTau * cfg.tau / (Ki * Ki * cfg.rates[i]) +
                kRateGradLap * cfg.laplacians[i] / (Ki * Ki * Ki * std::pow(cfg.rates[i], 3));
    for (int j = 0; j < k; ++j) {
      if (j == i) continue;
      const double G = greens_function(cfg.points[i], cfg.points[j]);
      dt += kRateGradInteraction * G /
            (Ki * cfg.k_values[j] * cfg.rates[i] * cfg.rates[i] * cfg.rates[j]);
    }
    g.d_rate[i] = dt;

    const SphereDerivatives d = sphere_derivatives(K, cfg.points[i]);
    g.d_location[i] = -kLocationGrad * d.gradient;
  }
  const double tau = cfg.tau;
  const double lt = std::abs(std::log(tau));
  g.alpha_budget = "O(|beta|^2) + O(tau |log tau|) + O(||v||^{2-tau})";
  g.rate_budget = "O(|beta| tau^{3/2}) + O(tau ||v||) + O(tau^{1/2} ||v||^{2-tau}) + O(tau^{3/2} |log tau|)";
  g.location_budget = "O(tau^{1/2}) + O(||v||) + O(tau^{-1/2} ||v||^{2-tau})";
  g.rate_budget_estimate = beta_max * std::pow(tau, 1.5) + tau * remainder_norm +
                           std::sqrt(tau) * std::pow(remainder_norm, 2.0 - tau) +
                           std::pow(tau, 1.5) * lt;
  return g;
}

namespace {

struct FProblem {
  int k;
  std::vector<double> inv_k_sq_4tau;  // 4 tau / K_j^2
  std::vector<double> M;              // row-major k x k

  double value(const std::vector<double>& s) const {
    double f = 0;
    for (int j = 0; j < k; ++j) f -= inv_k_sq_4tau[j] * std::log(s[j]);
    for (int i = 0; i < k; ++i) {
      f += 0.5 * M[i * k + i] * s[i] * s[i];
      for (int j = 0; j < k; ++j) f += 0.5 * M[i * k + j] * s[i] * s[j];
    }
    return f;
  }

  // dF/ds_i = -4tau/(K_i^2 s_i) + M_ii s_i + (M s)_i
  void gradient(const std::vector<double>& s, std::vector<double>& g) const {
    for (int i = 0; i < k; ++i) {
      double ms = 0;
      for (int j = 0; j < k; ++j) ms += M[i * k + j] * s[j];
      g[i] = -inv_k_sq_4tau[i] / s[i] + M[i * k + i] * s[i] + ms;
    }
  }

  // Hess_ij = (4tau/(K_i^2 s_i^2) + M_ii) delta_ij + M_ij
  void hessian(const std::vector<double>& s, std::vector<double>& h) const {
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) h[i * k + j] = M[i * k + j];
      h[i * k + i] += inv_k_sq_4tau[i] / (s[i] * s[i]) + M[i * k + i];
    }
  }
};

}  // namespace

BlowupPrediction solve_F_critical(const std::vector<CriticalPointRecord>& points,
                                  const AmbientPolynomial& K, double tau, double c_mu,
                                  const std::vector<double>* initial) {
  if (!(c_mu == 1.0 || c_mu == 0.25)) {
    throw std::invalid_argument("solve_F_critical: c_mu must be 1 or 1/4");
  }
  for (const CriticalPointRecord& r : points) {
    if (r.cls != CriticalClass::kMinus) {
      throw std::invalid_argument("solve_F_critical: all points must lie in cal-K^-");
    }
  }
  const InteractionMatrix M = build_matrix_M(points, K);
  if (!(M.mu_min > 0)) {
    throw std::domain_error("solve_F_critical: mu(M) <= 0, no interior minimum is guaranteed");
  }
  const int k = M.k;
  FProblem prob;
  prob.k = k;
  prob.M = M.entries;
  prob.inv_k_sq_4tau.resize(k);
  for (int i = 0; i < k; ++i) {
    const double Ki = points[i].k_value;
    prob.inv_k_sq_4tau[i] = 4.0 * tau / (Ki * Ki);
  }

  // Newton on u = log s keeps positivity unconditionally.
  std::vector<double> s(k, std::sqrt(2.0 * tau));
  if (initial) {
    if (static_cast<int>(initial->size()) != k) {
      throw std::invalid_argument("solve_F_critical: initial guess has wrong length");
    }
    s = *initial;
    for (double v : s) {
      if (!(v > 0)) throw std::invalid_argument("solve_F_critical: initial s must be positive");
    }
  }
  std::vector<double> g(k), h(static_cast<std::size_t>(k) * k);
  BlowupPrediction out;
  out.tau = tau;
  out.c_mu = c_mu;
  int it = 0;
  for (; it < 200; ++it) {
    prob.gradient(s, g);
    // Gradient in log coordinates: s_i g_i. The tolerance sits a couple of
    // digits above the rounding floor of the gradient evaluation.
    double gn = 0;
    for (int i = 0; i < k; ++i) gn = std::max(gn, std::abs(s[i] * g[i]));
    double scale = 0;
    for (int i = 0; i < k; ++i) scale = std::max(scale, prob.inv_k_sq_4tau[i]);
    if (gn <= 1e-13 * std::max(scale, 1e-300)) break;
    prob.hessian(s, h);
    // Hessian in log coordinates: diag(s) H diag(s) + diag(s_i g_i).
    Eigen::MatrixXd Hu(k, k);
    Eigen::VectorXd Gu(k);
    for (int i = 0; i < k; ++i) {
      Gu(i) = s[i] * g[i];
      for (int j = 0; j < k; ++j) Hu(i, j) = s[i] * h[i * k + j] * s[j];
      Hu(i, i) += s[i] * g[i];
    }
    // Keep the step a descent direction even when the log-space Hessian has
    // picked up negative curvature from the diag(s g) term.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hu);
    Eigen::VectorXd ev = es.eigenvalues();
    const double floor = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    for (int i = 0; i < k; ++i) ev(i) = std::max(ev(i), floor);
    Eigen::VectorXd du = -(es.eigenvectors() * ev.cwiseInverse().asDiagonal() *
                           es.eigenvectors().transpose() * Gu);
    // Armijo on F along u.
    const double f0 = prob.value(s);
    const double slope = Gu.dot(du);
    double step = 1.0;
    std::vector<double> snew(k);
    for (int ls = 0; ls < 80; ++ls) {
      for (int i = 0; i < k; ++i) snew[i] = s[i] * std::exp(step * du(i));
      if (prob.value(snew) <= f0 + 1e-4 * step * slope) break;
      step *= 0.5;
    }
    s = snew;
    if (step * du.cwiseAbs().maxCoeff() < 1e-14) break;  // at rounding resolution
  }
  if (it >= 200) {
    throw std::runtime_error("solve_F_critical: Newton did not converge in 200 iterations");
  }
  out.newton_iters = it;
  out.s_star = s;
  out.f_value = prob.value(s);
  out.t_star.resize(k);
  for (int i = 0; i < k; ++i) out.t_star[i] = 1.0 / s[i];

  prob.hessian(s, h);
  out.hessian_min_eig = sym_eig_min(h, k);
  out.hessian_pd = out.hessian_min_eig > 0;

  // lambda_j = t*_1 / (K_1 t*_j): the peak-height ratios under m_j ~ t_j/K_j,
  // normalized so lambda_1 K(q_1) = 1.
  out.lambda.resize(k);
  for (int j = 0; j < k; ++j) out.lambda[j] = out.t_star[0] / (points[0].k_value * out.t_star[j]);

  out.mu_pred.resize(k);
  if (k == 1) {
    const double Kq = points[0].k_value;
    out.mu_pred[0] = -4.0 * points[0].laplacian / (Kq * Kq * Kq);
  } else {
    for (int j = 0; j < k; ++j) {
      double mlj = 0;
      for (int l = 0; l < k; ++l) mlj += M.entries[l * k + j] * out.lambda[l];
      out.mu_pred[j] = mlj / (c_mu * out.lambda[j]);
    }
  }
  return out;
}

// ---- decomposition -------------------------------------------------------

namespace {

// Shared machinery: inner products of the target field against bubbles via
// grid dot products of P_sigma v, and bubble-bubble pairings in closed form.
struct FullFit {
  const HarmonicSpectrum* v;
  std::shared_ptr<const QuadratureGrid> grid;
  std::vector<double> pv;  // weights * values of P_sigma v at nodes
  double v_norm_sq;
  int k;

  // parameters packed as (t_i, xi_i[3]) per bubble; locations as base point +
  // tangent offset, re-retracted each outer iteration.
  std::vector<SpherePoint> base;
  std::vector<std::array<Vec4, 3>> frames;

  SpherePoint location(const std::vector<double>& x, int i) const {
    const double* xi = x.data() + 4 * i + 1;
    Vec4 p = base[i].vec() + xi[0] * frames[i][0] + xi[1] * frames[i][1] + xi[2] * frames[i][2];
    return SpherePoint((1.0 / norm(p)) * p);
  }
  double rate(const std::vector<double>& x, int i) const { return x[4 * i]; }

  double dot_bubble(const SpherePoint& P, double t, BubbleDeriv d, const Vec4& dir = Vec4{}) const {
    const auto& nodes = grid->nodes();
    BubbleParams b(P, std::max(t, 1.0 + 1e-12));
    double s = 0;
    for (std::size_t n = 0; n < nodes.size(); ++n) s += pv[n] * eval_bubble(b, nodes[n], d, dir);
    return s;
  }

  // c(x) = y^T G^{-1} y and alpha = G^{-1} y; objective = ||v||^2 - c.
  double neg_gain(const std::vector<double>& x, std::vector<double>* alpha_out) const {
    Eigen::VectorXd y(k);
    Eigen::MatrixXd G(k, k);
    std::vector<SpherePoint> P(k);
    std::vector<double> t(k);
    for (int i = 0; i < k; ++i) {
      P[i] = location(x, i);
      t[i] = rate(x, i);
      y(i) = dot_bubble(P[i], t[i], BubbleDeriv::kValue);
    }
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        G(i, j) = bubble_pair_inner(t[i], t[j], geodesic_distance(P[i], P[j]));
      }
    }
    Eigen::VectorXd alpha = G.ldlt().solve(y);
    if (alpha_out) {
      alpha_out->resize(k);
      for (int i = 0; i < k; ++i) (*alpha_out)[i] = alpha(i);
    }
    return v_norm_sq - y.dot(alpha);
  }

  // Analytic gradient of -gain:
  //   d(-c) = -2 alpha . dy/dtheta + alpha^T dG/dtheta alpha,
  // with dy via grid dots of the bubble derivatives and dG via the
  // closed-form pair derivative. Parameters are (t_i, xi_i[0..2]).
  Eigen::VectorXd gradient(const std::vector<double>& x) const {
    Eigen::VectorXd y(k);
    Eigen::MatrixXd G(k, k);
    std::vector<SpherePoint> P(k);
    std::vector<double> t(k);
    std::vector<std::array<Vec4, 3>> fr(k);
    for (int i = 0; i < k; ++i) {
      P[i] = location(x, i);
      t[i] = rate(x, i);
      fr[i] = tangent_frame(P[i]);
      y(i) = dot_bubble(P[i], t[i], BubbleDeriv::kValue);
    }
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) G(i, j) = bubble_pair_inner(t[i], t[j], geodesic_distance(P[i], P[j]));
    const Eigen::VectorXd alpha = G.ldlt().solve(y);

    Eigen::VectorXd g(4 * k);
    for (int i = 0; i < k; ++i) {
      // Rate derivative.
      double dyi = dot_bubble(P[i], t[i], BubbleDeriv::kRate);
      double dGq = 0;  // alpha^T dG/dt_i alpha = 2 alpha_i sum_j alpha_j d1 pair(t_i,t_j,d_ij)
      for (int j = 0; j < k; ++j) {
        dGq += 2.0 * alpha(i) * alpha(j) *
               bubble_pair_inner_dt(t[i], t[j], geodesic_distance(P[i], P[j]));
      }
      g(4 * i) = -2.0 * alpha(i) * dyi + dGq;
      // Location derivatives along the (re-anchored) frame; frames are
      // re-anchored each outer step so xi = 0 here and the frame of P[i]
      // coincides with frames[i].
      for (int a = 0; a < 3; ++a) {
        const double dya = dot_bubble(P[i], t[i], BubbleDeriv::kLocation, fr[i][a]);
        double dGa = 0;
        for (int j = 0; j < k; ++j) {
          if (j == i) continue;
          // d pair/d w * d w/d(P_i . e_a), w = 1 - P_i.P_j.
          const double w = 1.0 - dot(P[i].vec(), P[j].vec());
          const double E = t[i] / t[j] + t[j] / t[i] + 2.0 +
                           (t[i] * t[i] - 1.0) * (t[j] * t[j] - 1.0) * w / (2.0 * t[i] * t[j]);
          const double dE_dw = (t[i] * t[i] - 1.0) * (t[j] * t[j] - 1.0) / (2.0 * t[i] * t[j]);
          const double dpair_dw = -8.0 * kPi * kPi * dE_dw / (E * E);
          const double dw = -dot(fr[i][a], P[j].vec());
          dGa += 2.0 * alpha(i) * alpha(j) * dpair_dw * dw;
        }
        g(4 * i + 1 + a) = -2.0 * alpha(i) * dya + dGa;
      }
    }
    return g;
  }
};

}  // namespace

static DecomposeResult decompose_zonal(const HarmonicSpectrum& v, const ReducedConfig& init,
                                       const AmbientPolynomial& K, const DecomposeOptions& opts) {
  // Single bubble about the spectrum's pole (or its antipode). The fit is
  //   min_{alpha,t} ||v - alpha delta_t||^2, alpha*(t) = <v,delta_t>/|S^3|.
  const int L = v.L;
  const bool at_pole = geodesic_distance(init.points[0], v.pole) < kPi / 2;
  const double sign_flip = at_pole ? 1.0 : -1.0;  // (-1)^l pattern handled below

  const auto dot_v_bubble = [&](double t, bool dt) {
    double s = 0;
    for (int l = 0; l <= L; ++l) {
      double c = dt ? bubble_zonal_coeff_dt(t, l) : bubble_zonal_coeff(t, l);
      if (sign_flip < 0 && l % 2 == 1) c = -c;
      s += (l + 1.0) * v.coeffs[l] * c;
    }
    return s;
  };

  // Newton on the stationarity of c(t) = <v,delta_t>^2/|S^3|.
  double t = init.rates[0];
  int it = 0;
  double y = dot_v_bubble(t, false);
  for (; it < opts.max_iters; ++it) {
    const double yp = dot_v_bubble(t, true);
    // d/dt [y^2] = 2 y y'; second derivative via a central difference of y'.
    const double h = std::max(1e-6 * t, 1e-8);
    const double ypp = (dot_v_bubble(t + h, true) - dot_v_bubble(t - h, true)) / (2.0 * h);
    const double g1 = y * yp;
    const double g2 = yp * yp + y * ypp;
    double step;
    if (std::abs(g2) > 1e-300) step = -g1 / g2;
    else step = g1 > 0 ? 0.1 * t : -0.1 * t;
    if (std::abs(step) > 0.5 * t) step = step > 0 ? 0.5 * t : -0.5 * t;
    t = std::max(1.0 + 1e-9, t + step);
    y = dot_v_bubble(t, false);
    if (std::abs(step) <= opts.grad_tol * t + 1e-14) {
      ++it;
      break;
    }
  }
  const double alpha = y / kVolS3;

  DecomposeResult out;
  out.fit = init;
  out.fit.rates[0] = t;
  out.fit.alphas[0] = alpha;
  out.fit.points[0] = at_pole ? v.pole : SpherePoint(-1.0 * v.pole.vec());
  out.iters = it;
  out.converged = it < opts.max_iters;
  out.remainder = v;
  for (int l = 0; l <= L; ++l) {
    double c = bubble_zonal_coeff(t, l);
    if (sign_flip < 0 && l % 2 == 1) c = -c;
    out.remainder.coeffs[l] -= alpha * c;
  }
  out.remainder_norm = hsigma_norm(out.remainder);
  (void)K;
  return out;
}

DecomposeResult decompose_solution(const HarmonicSpectrum& v, int k, const ReducedConfig& init,
                                   const AmbientPolynomial& K, std::shared_ptr<const QuadratureGrid> grid,
                                   const DecomposeOptions& opts) {
  if (static_cast<int>(init.points.size()) != k) {
    throw std::invalid_argument("decompose_solution: init does not match k");
  }
  if (v.zonal) {
    if (k != 1) throw std::invalid_argument("decompose_solution: zonal spectra support k = 1 only");
    return decompose_zonal(v, init, K, opts);
  }
  if (!grid) grid = QuadratureGrid::build_order(3 * v.L + 1);

  FullFit fit;
  fit.v = &v;
  fit.grid = grid;
  fit.k = k;
  fit.v_norm_sq = hsigma_inner(v, v);
  // P_sigma v synthesized once; pairings become plain weighted dots.
  const SphericalField pv = inverse_transform(apply_p_half(v), grid);
  fit.pv.resize(pv.values.size());
  for (std::size_t i = 0; i < fit.pv.size(); ++i) fit.pv[i] = grid->weights()[i] * pv.values[i];

  std::vector<double> x(4 * k, 0.0);
  fit.base = init.points;
  fit.frames.resize(k);
  for (int i = 0; i < k; ++i) {
    fit.frames[i] = tangent_frame(init.points[i]);
    x[4 * i] = init.rates[i];
  }

  // Damped Newton on the gain c(x) with finite-difference derivatives; the
  // objective is smooth and the initial guess sits in the basin by contract.
  const int dim = 4 * k;
  DecomposeResult out;
  double prev = fit.neg_gain(x, nullptr);
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    // Re-anchor the location parameters so tangent offsets stay small.
    for (int i = 0; i < k; ++i) {
      fit.base[i] = fit.location(x, i);
      fit.frames[i] = tangent_frame(fit.base[i]);
      x[4 * i + 1] = x[4 * i + 2] = x[4 * i + 3] = 0.0;
    }
    Eigen::VectorXd g(dim);
    Eigen::MatrixXd H(dim, dim);
    std::vector<double> xp = x, xm = x;
    const auto fd_step = [&](int d) { return d % 4 == 0 ? std::max(1e-6 * x[d], 1e-7) : 1e-6; };
    std::vector<double> f_p(dim), f_m(dim);
    const double f0 = fit.neg_gain(x, nullptr);
    for (int d = 0; d < dim; ++d) {
      const double h = fd_step(d);
      xp = x;
      xm = x;
      xp[d] += h;
      xm[d] -= h;
      f_p[d] = fit.neg_gain(xp, nullptr);
      f_m[d] = fit.neg_gain(xm, nullptr);
      g(d) = (f_p[d] - f_m[d]) / (2.0 * h);
      H(d, d) = (f_p[d] - 2.0 * f0 + f_m[d]) / (h * h);
    }
    for (int d = 0; d < dim; ++d) {
      for (int e = d + 1; e < dim; ++e) {
        const double hd = fd_step(d), he = fd_step(e);
        std::vector<double> xx = x;
        xx[d] += hd;
        xx[e] += he;
        const double fpp = fit.neg_gain(xx, nullptr);
        const double hde = (fpp - f_p[d] - f_p[e] + f0) / (hd * he);
        H(d, e) = hde;
        H(e, d) = hde;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    Eigen::VectorXd ev = es.eigenvalues();
    const double floor = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    for (int d = 0; d < dim; ++d) ev(d) = std::max(std::abs(ev(d)), floor);
    Eigen::VectorXd dx = -(es.eigenvectors() * ev.cwiseInverse().asDiagonal() *
                           es.eigenvectors().transpose() * g);
    double step = 1.0;
    std::vector<double> xn(x.size());
    double fn = f0;
    for (int ls = 0; ls < 40; ++ls) {
      for (int d = 0; d < dim; ++d) xn[d] = x[d] + step * dx(d);
      for (int i = 0; i < k; ++i) xn[4 * i] = std::max(1.0 + 1e-9, xn[4 * i]);
      fn = fit.neg_gain(xn, nullptr);
      if (fn <= f0 - 1e-4 * step * std::abs(g.dot(dx))) break;
      step *= 0.5;
    }
    x = xn;
    const double rel = std::abs(prev - fn) / std::max(std::abs(fn), 1e-300);
    prev = fn;
    if (g.lpNorm<Eigen::Infinity>() <= opts.grad_tol * std::max(1.0, fit.v_norm_sq) && rel < 1e-14) {
      ++it;
      break;
    }
  }
  out.iters = it;
  out.converged = it < opts.max_iters;

  std::vector<double> alphas;
  fit.neg_gain(x, &alphas);
  out.fit = init;
  for (int i = 0; i < k; ++i) {
    out.fit.points[i] = fit.location(x, i);
    out.fit.rates[i] = fit.rate(x, i);
    out.fit.alphas[i] = alphas[i];
    const SphereDerivatives d = sphere_derivatives(K, out.fit.points[i]);
    out.fit.k_values[i] = d.value;
    out.fit.laplacians[i] = d.laplacian;
  }

  // Remainder spectrum: v minus the forward transforms of the fitted bubbles.
  out.remainder = v;
  for (int i = 0; i < k; ++i) {
    BubbleParams b(out.fit.points[i], out.fit.rates[i]);
    const SphericalField bf = sample(grid, [&](const SpherePoint& p) { return eval_bubble(b, p); });
    HarmonicSpectrum bs = forward_transform(bf, v.L);
    bs *= out.fit.alphas[i];
    out.remainder -= bs;
  }
  out.remainder_norm = hsigma_norm(out.remainder);
  return out;
}

void write_prediction(std::ostream& os, const BlowupPrediction& p) {
  os.precision(16);
  os << "blowup prediction\n";
  os << "tau " << p.tau << "\n";
  os << "c_mu " << p.c_mu << "\n";
  os << "k " << p.t_star.size() << "\n";
  for (std::size_t j = 0; j < p.t_star.size(); ++j) {
    os << "  j " << j << " t_star " << p.t_star[j] << " mu_pred " << p.mu_pred[j] << " lambda "
       << p.lambda[j] << "\n";
  }
  os << "f_value " << p.f_value << "\n";
  os << "hessian_min_eig " << p.hessian_min_eig << " pd " << (p.hessian_pd ? 1 : 0) << "\n";
  os << "newton_iters " << p.newton_iters << "\n";
}

}  // namespace nir3
