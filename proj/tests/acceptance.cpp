// Acceptance gate: every criterion below runs at its pinned tolerance and
// prints one PASS/FAIL line. The binary exits with the number of failed
// criteria (0 = all green). Select criteria by listing their numbers as
// arguments; no arguments runs all of them.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "nir3/bubbles.hpp"
#include "nir3/constants.hpp"
#include "nir3/morse.hpp"
#include "nir3/pohozaev.hpp"
#include "nir3/reduced.hpp"
#include "nir3/solver.hpp"
#include "nir3/spectral.hpp"
#include "oracles.hpp"

using namespace nir3;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

bool g_verbose = true;

void detail(const char* fmt, ...) {
  if (!g_verbose) return;
  va_list ap;
  va_start(ap, fmt);
  std::printf("      ");
  std::vprintf(fmt, ap);
  va_end(ap);
}

void line(int id, const char* name, bool pass, double secs) {
  std::printf("[%d] %-58s %s  (%.1fs)\n", id, name, pass ? "PASS" : "FAIL", secs);
  std::fflush(stdout);
}

AmbientPolynomial tilted() { return AmbientPolynomial::parse("x4 + 2"); }

// ---- criterion 1: spectral identity suite ---------------------------------

bool criterion1() {
  Timer timer;
  const int L = 32;
  auto grid = QuadratureGrid::build_order(3 * L + 1);

  // P_sigma 1 = 1.
  HarmonicSpectrum one = forward_transform(sample(grid, [](const SpherePoint&) { return 1.0; }), L);
  HarmonicSpectrum pone = apply_p_half(one);
  pone -= one;
  bool pass = pone.l2_norm() < 1e-10;
  detail("P_sigma 1 = 1: residual %.2e\n", pone.l2_norm());

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ut(std::log(1.3), std::log(static_cast<double>(L) / 4.0));
  double worst_eq = 0, worst_pair = 0;
  for (int i = 0; i < 20; ++i) {
    const double t = std::exp(ut(rng));
    const SpherePoint P = test::random_point(rng);
    const BubbleParams b(P, t);
    const HarmonicSpectrum s = forward_transform(sample(grid, [&](const SpherePoint& x) {
      return eval_bubble(b, x);
    }), L);
    const HarmonicSpectrum s2 = forward_transform(sample(grid, [&](const SpherePoint& x) {
      const double v = eval_bubble(b, x);
      return v * v;
    }), L);
    HarmonicSpectrum r = apply_p_half(s);
    r -= s2;
    worst_eq = std::max(worst_eq, r.l2_norm() / s2.l2_norm());
    worst_pair = std::max(worst_pair, std::abs(hsigma_inner(s, s) / kVolS3 - 1.0));
  }
  detail("P delta = delta^2 worst rel L2 over 20 (P,t): %.2e (tol 1e-6)\n", worst_eq);
  detail("<delta,delta> = 2 pi^2 worst rel err: %.2e (tol 1e-5)\n", worst_pair);
  pass = pass && worst_eq <= 1e-6 && worst_pair <= 1e-5;
  const double secs = timer.seconds();
  pass = pass && secs <= 120.0;
  line(1, "spectral identity suite (P1=1, P delta=delta^2, <d,d>)", pass, secs);
  return pass;
}

// ---- criterion 2: interaction asymptotics ---------------------------------

bool criterion2() {
  Timer timer;
  const std::vector<double> taus{0.04, 0.01, 0.0025};
  std::vector<double> lx, ly;
  bool ratios_ok = true;
  for (double tau : taus) {
    const double t = 1.0 / std::sqrt(tau);
    const BubbleParams b1(SpherePoint::axis(3), t);
    const BubbleParams b2(SpherePoint(1, 0, 0, 0), t);
    const double numeric = interaction_integral(b1, b2, 2.0, 1.0, 1e-9);
    const double G = greens_function(b1.P, b2.P);
    const double leading = 4.0 * kPi * kAreaS2 * G / (t * t);
    const double ratio = numeric / leading;
    const bool ok = ratio >= 0.9 && ratio <= 1.1;
    detail("tau %.4g: ratio %.6f %s (closed form 1/(1+6tau+tau^2) = %.6f)\n", tau, ratio,
           ok ? "in [0.9,1.1]" : "OUTSIDE [0.9,1.1]", 1.0 / (1.0 + 6.0 * tau + tau * tau));
    ratios_ok = ratios_ok && ok;
    lx.push_back(std::log(tau));
    ly.push_back(std::log(std::abs(numeric - leading)));
  }
  const double exponent = test::fit_slope(lx, ly);
  detail("remainder exponent %.3f (need >= 1.0)\n", exponent);
  const bool pass = ratios_ok && exponent >= 1.0 && timer.seconds() <= 300.0;
  if (!ratios_ok) {
    detail("note: the tau = 0.04 point is pre-asymptotic; the exact value of the\n");
    detail("      integral makes the ratio 1/(1+6tau+tau^2) < 0.9 for tau > 0.0176,\n");
    detail("      so the [0.9,1.1] bound cannot hold there (see decisions ledger).\n");
  }
  line(2, "interaction asymptotics a.2 (ratio + remainder exponent)", pass, timer.seconds());
  return pass;
}

// ---- criterion 3: Pohozaev constant ---------------------------------------

bool criterion3() {
  Timer timer;
  const std::vector<double> deltas{1e-2, 1e-3, 1e-4};
  const AmbientPolynomial zero;
  const Prop2Report r1 = prop2_check(1.0, zero, deltas);
  const Prop2Report rm3 = prop2_check(-3.0, zero, deltas);
  const Prop2Report r2 = prop2_check(2.0, zero, deltas);
  const double lin1 = std::abs(rm3.extrapolated - (-3.0) * r1.extrapolated) / std::abs(rm3.extrapolated);
  const double lin2 = std::abs(r2.extrapolated - 2.0 * r1.extrapolated) / std::abs(r2.extrapolated);
  detail("M=1 extrapolated %.10g vs -2 pi^2 = %.10g (rel %.2e, tol 1e-2)\n", r1.extrapolated,
         r1.closed_form, r1.rel_deviation);
  detail("linearity residuals %.2e, %.2e (tol 1e-3)\n", lin1, lin2);
  const bool pass =
      r1.rel_deviation <= 0.01 && std::max(lin1, lin2) <= 1e-3 && timer.seconds() <= 60.0;
  line(3, "Pohozaev flux limit (-2 pi^2 M, linear in M)", pass, timer.seconds());
  return pass;
}

// ---- criterion 4: degree arithmetic ---------------------------------------

AmbientPolynomial random_positive_poly(std::uint64_t seed, int degree) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Monomial> terms;
  for (int a = 0; a <= degree; ++a)
    for (int b = 0; a + b <= degree; ++b)
      for (int c = 0; a + b + c <= degree; ++c)
        for (int d = 0; a + b + c + d <= degree; ++d) {
          if (std::abs(u(rng)) < 0.6) continue;
          Monomial m;
          m.coeff = 0.3 * u(rng);
          m.powers = {a, b, c, d};
          terms.push_back(m);
        }
  AmbientPolynomial p{terms};
  const double mn = p.min_on_sphere_sampled(2048);
  return p + AmbientPolynomial::constant(1.0 - std::min(0.0, mn) * 1.5);
}

bool criterion4() {
  Timer timer;
  bool pass = true;

  const DegreeReport rep = index_of_K(tilted(), 400, 0);
  bool base = rep.critical_points.size() == 2 && rep.morse_ok && rep.index == -2 && rep.in_A &&
              rep.corollary_holds && rep.corollary_agrees && rep.corollary_index == -2;
  double mu = rep.subsets.empty() ? 0.0 : rep.subsets[0].mu;
  int i_n = -1;
  double lap_n = 0;
  for (const CriticalPointRecord& r : rep.critical_points) {
    const double d_north = geodesic_distance(r.location, SpherePoint::axis(3));
    const double d_south = kPi - d_north;
    base = base && (d_north < 1e-9 || d_south < 1e-9);
    if (d_north < 1e-9) {
      i_n = r.morse_index;
      lap_n = r.laplacian;
    }
  }
  base = base && i_n == 3 && std::abs(lap_n + 3.0) < 1e-10 && std::abs(mu - 1.0 / 9.0) < 1e-10;
  detail("tilted curvature: K = {+-e4} %d, i(e4) = %d, Lap = %.12g, mu = %.12g, Index = %d\n",
         static_cast<int>(rep.critical_points.size()), i_n, lap_n, mu, rep.index);
  pass = pass && base;

  int euler_done = 0;
  bool euler_ok = true;
  for (std::uint64_t seed = 300; euler_done < 10 && seed < 360; ++seed) {
    const AmbientPolynomial K = random_positive_poly(seed, 3);
    std::vector<CriticalPointRecord> pts;
    try {
      pts = find_critical_points(K, 700, 1);
    } catch (const std::domain_error&) {
      continue;
    }
    bool morse = !pts.empty();
    for (const CriticalPointRecord& r : pts) morse = morse && !r.hessian_degenerate;
    if (!morse) continue;
    int sum = 0;
    for (const CriticalPointRecord& r : pts) sum += (r.morse_index % 2 == 0) ? 1 : -1;
    euler_ok = euler_ok && sum == 0;
    ++euler_done;
  }
  detail("Morse-Euler sum over %d random Morse curvatures: %s\n", euler_done,
         euler_ok && euler_done == 10 ? "all zero" : "violation or too few samples");
  pass = pass && euler_ok && euler_done == 10;

  bool invariance = true;
  for (std::uint64_t s : {7u, 8u}) {
    invariance = invariance && index_of_K(tilted().rotated(Rotation4::random(s)), 400, 0).index == -2;
  }
  for (double c : {0.5, 2.0}) {
    invariance = invariance && index_of_K(tilted().scaled(c), 400, 0).index == -2;
  }
  detail("Index invariance under rotation and scaling: %s\n", invariance ? "ok" : "violated");
  pass = pass && invariance;

  const double secs = timer.seconds();
  pass = pass && secs <= 60.0;
  line(4, "degree arithmetic (inventory, mu, Index, Euler, invariance)", pass, secs);
  return pass;
}

// ---- criterion 5: reduced-model closed form --------------------------------

bool criterion5() {
  Timer timer;
  const AmbientPolynomial K = tilted();
  std::vector<CriticalPointRecord> km;
  for (const CriticalPointRecord& r : find_critical_points(K, 400, 0)) {
    if (r.cls == CriticalClass::kMinus) km.push_back(r);
  }
  bool pass = km.size() == 1;
  for (double tau : {1e-1, 1e-2, 1e-3}) {
    const BlowupPrediction p = solve_F_critical(km, K, tau);
    const double dev = std::abs(p.t_star[0] * std::sqrt(2.0 * tau) - 1.0);
    detail("tau %.0e: |t* sqrt(2 tau) - 1| = %.2e (tol 1e-10), hessian PD %d\n", tau, dev,
           p.hessian_pd ? 1 : 0);
    pass = pass && dev <= 1e-10 && p.hessian_pd;
  }
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const double s_ref = solve_F_critical(km, K, 0.01).s_star[0];
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> init{s_ref * std::pow(10.0, u(rng))};
    worst = std::max(worst,
                     std::abs(solve_F_critical(km, K, 0.01, 0.25, &init).s_star[0] - s_ref) / s_ref);
  }
  detail("100 restarts: worst relative spread %.2e (tol 1e-8)\n", worst);
  pass = pass && worst <= 1e-8;
  line(5, "reduced-model closed form (t* sqrt(2 tau) = 1, restarts)", pass, timer.seconds());
  return pass;
}

// ---- criteria 6 and 7: blow-up laws + constant arbitration -----------------

struct BranchData {
  std::vector<double> taus, heights, tau_m_sq, t_fit, peak_dist, remainders;
  bool valid = false;
};

BranchData run_branch_for_acceptance() {
  BranchData out;
  const AmbientPolynomial K = tilted();
  const std::vector<CriticalPointRecord> pts = find_critical_points(K, 400, 0);
  SolverState init;
  init.v = HarmonicSpectrum::zonal_zeros(512, SpherePoint::axis(3));
  init.v.coeffs[0] = std::sqrt(kVolS3) * 0.25;
  const ContinuationResult res = continuation(0.5, 0.005, 24, K, init, SolverOptions{}, pts);
  for (const BranchPoint& bp : res.points) {
    if (!bp.state.converged || bp.diag.peaks.empty()) continue;
    const PeakInfo& pk = bp.diag.peaks.front();
    out.taus.push_back(bp.state.tau);
    out.heights.push_back(pk.height);
    out.tau_m_sq.push_back(pk.tau_m_sq);
    out.peak_dist.push_back(geodesic_distance(pk.location, SpherePoint::axis(3)));
    out.t_fit.push_back(bp.fit_valid ? bp.fit.fit.rates[0] : 0.0);
    out.remainders.push_back(bp.fit_valid ? bp.fit.remainder_norm : 0.0);
  }
  out.valid = !out.taus.empty() && std::abs(out.taus.back() - 0.005) < 1e-9;
  return out;
}

const BranchData& shared_branch() {
  static BranchData data = run_branch_for_acceptance();
  return data;
}

bool criterion6() {
  Timer timer;
  const BranchData& b = shared_branch();
  if (!b.valid) {
    detail("branch did not reach tau = 0.005\n");
    line(6, "blow-up laws by zonal continuation", false, timer.seconds());
    return false;
  }
  const std::size_t n = b.taus.size();

  // (a) peak location converges to e4.
  const bool a_ok = b.peak_dist.back() <= 1e-3;
  detail("(a) final peak distance to e4: %.3e (tol 1e-3) %s\n", b.peak_dist.back(),
         a_ok ? "pass" : "FAIL");

  // Last decade tau in [0.005, 0.05].
  std::vector<double> lt, lm, taus_dec, heights_dec;
  for (std::size_t i = 0; i < n; ++i) {
    if (b.taus[i] <= 0.05 + 1e-12) {
      lt.push_back(std::log(b.taus[i]));
      lm.push_back(std::log(b.heights[i]));
      taus_dec.push_back(b.taus[i]);
      heights_dec.push_back(b.heights[i]);
    }
  }
  const double slope = test::fit_slope(lt, lm);
  const bool b_ok = std::abs(slope + 0.5) <= 0.05;
  detail("(b) log m vs log tau slope on the last decade: %.4f (need -0.5 +- 0.05) %s\n", slope,
         b_ok ? "pass" : "FAIL");
  if (!b_ok) {
    detail("    note: tau m^2 still drifts toward its limit like sqrt(tau) in this window,\n");
    detail("    adding about -0.05 of slope; the bound holds only for decades ending below\n");
    detail("    tau ~ 1e-3 (see decisions ledger).\n");
  }

  // (c) Cauchy over the last three tau m^2 values.
  bool c_ok = n >= 3;
  if (c_ok) {
    const double f1 = b.tau_m_sq[n - 3], f2 = b.tau_m_sq[n - 2], f3 = b.tau_m_sq[n - 1];
    const double spread = std::max({std::abs(f1 - f2), std::abs(f2 - f3), std::abs(f1 - f3)});
    c_ok = spread / std::abs(f3) <= 0.05;
    detail("(c) tau m^2 last three: %.5f %.5f %.5f (spread %.2f%%, tol 5%%) %s\n", f1, f2, f3,
           100.0 * spread / std::abs(f3), c_ok ? "pass" : "FAIL");
  }

  // (d) |tau log m| decreasing over the last decade.
  bool d_ok = true;
  for (std::size_t i = 1; i < taus_dec.size(); ++i) {
    d_ok = d_ok && std::abs(taus_dec[i] * std::log(heights_dec[i])) <
                       std::abs(taus_dec[i - 1] * std::log(heights_dec[i - 1])) + 1e-14;
  }
  detail("(d) |tau log m| decreasing over the last decade: %s\n", d_ok ? "pass" : "FAIL");

  // (e) fitted rate against the reduced-model rate throughout.
  bool e_ok = true;
  double e_min = 1e300, e_max = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (b.t_fit[i] <= 0) continue;  // pre-concentration points carry no fit
    const double t_star = 1.0 / std::sqrt(2.0 * b.taus[i]);
    const double r = b.t_fit[i] / t_star;
    e_min = std::min(e_min, r);
    e_max = std::max(e_max, r);
    e_ok = e_ok && r >= 1.0 / 3.0 && r <= 3.0;
  }
  detail("(e) t_fit/t* within [1/3, 3] throughout: range [%.3f, %.3f] %s\n", e_min, e_max,
         e_ok ? "pass" : "FAIL");

  // (f) remainder norm <= C tau |log tau| with fitted exponent >= 0.9.
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < n; ++i) {
    if (b.remainders[i] > 0 && b.t_fit[i] > 0) {
      lx.push_back(std::log(b.taus[i] * std::abs(std::log(b.taus[i]))));
      ly.push_back(std::log(b.remainders[i]));
    }
  }
  bool f_ok = lx.size() >= 4;
  double f_slope = 0, f_C = 0;
  if (f_ok) {
    f_slope = test::fit_slope(lx, ly);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    f_C = std::exp(my / ly.size() - f_slope * mx / lx.size());
    f_ok = f_slope >= 0.9 && f_C > 0 && std::isfinite(f_C);
  }
  detail("(f) remainder vs tau|log tau|: exponent %.3f (need >= 0.9), C = %.3g %s\n", f_slope, f_C,
         f_ok ? "pass" : "FAIL");

  const double secs = timer.seconds();
  const bool pass = a_ok && b_ok && c_ok && d_ok && e_ok && f_ok && secs <= 900.0;
  line(6, "blow-up laws by zonal continuation (a-f)", pass, secs);
  return pass;
}

bool criterion7() {
  Timer timer;
  const BranchData& b = shared_branch();
  if (!b.valid || b.taus.size() < 2) {
    line(7, "constant arbitration report", false, timer.seconds());
    return false;
  }
  const std::size_t n = b.taus.size();
  const double s1 = std::sqrt(b.taus[n - 2]), s2 = std::sqrt(b.taus[n - 1]);
  const double extr = (s1 * b.tau_m_sq[n - 1] - s2 * b.tau_m_sq[n - 2]) / (s1 - s2);
  const double cand_flux = 4.0 / 9.0;
  const double cand_reduced = 1.0 / 18.0;
  const double d_flux = std::abs(extr - cand_flux) / cand_flux;
  const double d_reduced = std::abs(extr - cand_reduced) / cand_reduced;
  detail("extrapolated tau m^2 = %.6f\n", extr);
  detail("candidate 4/9  (flux route):    relative distance %.4f\n", d_flux);
  detail("candidate 1/18 (reduced route): relative distance %.4f\n", d_reduced);
  detail("nearer candidate: %s\n", d_flux <= d_reduced ? "4/9 (flux route)" : "1/18 (reduced route)");
  // Reporting requirement: producing the comparison is the criterion.
  const bool pass = std::isfinite(extr);
  line(7, "constant arbitration (tau m^2 vs 4/9 and 1/18, reported)", pass, timer.seconds());
  return pass;
}

// ---- criterion 8: solver correctness properties ----------------------------

bool criterion8() {
  Timer timer;
  const AmbientPolynomial K = tilted();
  bool pass = true;

  // Jacobian vs finite differences, slope >= 1.9.
  {
    const int L = 8;
    const double tau = 0.35;
    HarmonicSpectrum v = HarmonicSpectrum::zeros(L);
    v.coeffs[0] = std::sqrt(kVolS3) * 0.8;
    v += test::random_spectrum(L, 81, 0.01);
    const HarmonicSpectrum w = test::random_spectrum(L, 82, 0.05);
    const auto jres = [&](double h) {
      HarmonicSpectrum vp = v, vm = v;
      for (std::size_t i = 0; i < v.coeffs.size(); ++i) {
        vp.coeffs[i] += h * w.coeffs[i];
        vm.coeffs[i] -= h * w.coeffs[i];
      }
      HarmonicSpectrum d = residual(vp, tau, K);
      d -= residual(vm, tau, K);
      d *= 1.0 / (2.0 * h);
      return d;
    };
    const HarmonicSpectrum j1 = jres(1e-3), j2 = jres(5e-4), j3 = jres(2.5e-4);
    double e1 = 0, e2 = 0;
    for (std::size_t i = 0; i < j1.coeffs.size(); ++i) {
      e1 = std::max(e1, std::abs(j1.coeffs[i] - j2.coeffs[i]));
      e2 = std::max(e2, std::abs(j2.coeffs[i] - j3.coeffs[i]));
    }
    const double slope = std::log2(e1 / e2);
    detail("Jacobian FD slope: %.3f (need >= 1.9)\n", slope);
    pass = pass && slope >= 1.9;
  }

  // Energy stationarity at a converged state.
  {
    const int L = 10;
    const double tau = 0.4;
    HarmonicSpectrum seed = HarmonicSpectrum::zeros(L);
    seed.coeffs[0] = std::sqrt(kVolS3) * 0.5;
    const SolverState st = newton_solve(seed, tau, K);
    double worst = 0;
    for (int i = 0; i < 50; ++i) {
      const HarmonicSpectrum w = test::random_spectrum(L, 900 + i);
      const double p = energy_pairing(st.v, w, tau, K);
      worst = std::max(worst, std::abs(p) / (hsigma_norm(w) * std::max(1.0, st.rhs_norm)));
    }
    detail("energy stationarity over 50 directions: %.2e (tol 1e-6), converged %d\n", worst,
           st.converged ? 1 : 0);
    pass = pass && st.converged && worst <= 1e-6;
  }

  // Rotation equivariance to solver tolerance.
  {
    const int L = 10;
    const double tau = 0.3;
    const Rotation4 R = Rotation4::random(83);
    HarmonicSpectrum seed = HarmonicSpectrum::zeros(L);
    seed.coeffs[0] = std::sqrt(kVolS3) * 0.5;
    const SolverState s1 = newton_solve(seed, tau, K);
    const SolverState s2 = newton_solve(seed, tau, K.rotated(R));
    std::mt19937_64 rng(84);
    double worst = 0;
    for (int i = 0; i < 25; ++i) {
      const SpherePoint p = test::random_point(rng);
      worst = std::max(worst, std::abs(evaluate(s2.v, R.apply(p)) - evaluate(s1.v, p)));
    }
    detail("rotation equivariance sup error: %.2e (tol 1e-6)\n", worst);
    pass = pass && s1.converged && s2.converged && worst <= 1e-6;
  }

  // Full-3D vs zonal agreement at tau = 0.2.
  {
    const int L = 16;
    const double tau = 0.2;
    HarmonicSpectrum seed = HarmonicSpectrum::zeros(L);
    seed.coeffs[0] = std::sqrt(kVolS3) * 0.5;
    const SolverState sf = newton_solve(seed, tau, K);
    HarmonicSpectrum zseed = HarmonicSpectrum::zonal_zeros(L, SpherePoint::axis(3));
    zseed.coeffs[0] = std::sqrt(kVolS3) * 0.5;
    const SolverState sz = axisym_solve(K, SpherePoint::axis(3), tau, zseed);
    HarmonicSpectrum diff = sf.v;
    diff -= zonal_to_full(sz.v);
    const double err = diff.l2_norm();
    detail("full-3D vs zonal at tau = 0.2: L2 difference %.2e (tol 1e-6)\n", err);
    pass = pass && sf.converged && sz.converged && err <= 1e-6;
  }

  line(8, "solver correctness (Jacobian, energy, equivariance, zonal)", pass, timer.seconds());
  return pass;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> want;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quiet") == 0) {
      g_verbose = false;
      continue;
    }
    want.push_back(std::atoi(argv[i]));
  }
  if (want.empty()) want = {1, 2, 3, 4, 5, 6, 7, 8};

  int failures = 0;
  for (int id : want) {
    bool ok = false;
    switch (id) {
      case 1: ok = criterion1(); break;
      case 2: ok = criterion2(); break;
      case 3: ok = criterion3(); break;
      case 4: ok = criterion4(); break;
      case 5: ok = criterion5(); break;
      case 6: ok = criterion6(); break;
      case 7: ok = criterion7(); break;
      case 8: ok = criterion8(); break;
      default:
        std::printf("unknown criterion %d\n", id);
        break;
    }
    if (!ok) ++failures;
  }
  return failures;
}
