#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nir3/bubbles.hpp"
#include "nir3/constants.hpp"
#include "nir3/morse.hpp"
#include "nir3/pohozaev.hpp"
#include "nir3/reduced.hpp"
#include "nir3/solver.hpp"
#include "nir3/spectral.hpp"

namespace nir3::cli {

namespace fs = std::filesystem;

namespace {

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream is(s);
  double v;
  while (is >> v) out.push_back(v);
  return out;
}

bool parse_bool(const std::string& s) { return s == "1" || s == "true" || s == "yes" || s == "on"; }

struct KeyHandler {
  const char* section;
  const char* key;
  void (*apply)(RunConfig&, const std::string&);
};

const KeyHandler kHandlers[] = {
    {"run", "out", [](RunConfig& c, const std::string& v) { c.out_dir = v; }},
    {"run", "seed", [](RunConfig& c, const std::string& v) { c.seed = std::stoull(v); }},
    {"run", "L", [](RunConfig& c, const std::string& v) { c.L = std::stoi(v); }},
    {"run", "L_zonal", [](RunConfig& c, const std::string& v) { c.L_zonal = std::stoi(v); }},
    {"run", "zonal", [](RunConfig& c, const std::string& v) { c.zonal = parse_bool(v); }},
    {"problem", "K", [](RunConfig& c, const std::string& v) { c.K_expr = v; }},
    {"problem", "rotate",
     [](RunConfig& c, const std::string& v) {
       std::istringstream is(v);
       std::string triple;
       while (std::getline(is, triple, ';')) {
         std::istringstream ts(triple);
         double i, j, a;
         if (ts >> i >> j >> a) c.rotations.push_back({i, j, a});
         else throw std::invalid_argument("rotate expects semicolon-separated 'i j angle' triples");
       }
     }},
    {"problem", "zonal_axis",
     [](RunConfig& c, const std::string& v) {
       const std::vector<double> a = parse_double_list(v);
       if (a.size() != 4) throw std::invalid_argument("zonal_axis expects four components");
       for (int i = 0; i < 4; ++i) c.zonal_axis[i] = a[i];
     }},
    {"analyze", "n_starts", [](RunConfig& c, const std::string& v) { c.n_starts = std::stoi(v); }},
    {"validate", "taus", [](RunConfig& c, const std::string& v) { c.taus = parse_double_list(v); }},
    {"validate", "separation", [](RunConfig& c, const std::string& v) { c.separation = std::stod(v); }},
    {"validate", "rel_tol", [](RunConfig& c, const std::string& v) { c.quad_rel_tol = std::stod(v); }},
    {"validate", "deltas",
     [](RunConfig& c, const std::string& v) { c.pohozaev_deltas = parse_double_list(v); }},
    {"solve", "tau", [](RunConfig& c, const std::string& v) { c.tau = std::stod(v); }},
    {"solve", "seed_mode", [](RunConfig& c, const std::string& v) { c.seed_mode = v; }},
    {"solve", "rtol", [](RunConfig& c, const std::string& v) { c.rtol = std::stod(v); }},
    {"continue", "tau_start", [](RunConfig& c, const std::string& v) { c.tau_start = std::stod(v); }},
    {"continue", "tau_end", [](RunConfig& c, const std::string& v) { c.tau_end = std::stod(v); }},
    {"continue", "n_steps", [](RunConfig& c, const std::string& v) { c.n_steps = std::stoi(v); }},
    {"continue", "c_mu", [](RunConfig& c, const std::string& v) { c.c_mu = std::stod(v); }},
    {"continue", "seed_mode", [](RunConfig& c, const std::string& v) { c.seed_mode = v; }},
    {"continue", "rtol", [](RunConfig& c, const std::string& v) { c.rtol = std::stod(v); }},
    {"predict", "tau", [](RunConfig& c, const std::string& v) { c.tau = std::stod(v); }},
    {"report", "branch_csv", [](RunConfig& c, const std::string& v) { c.branch_csv = v; }},
    {"report", "prediction_file", [](RunConfig& c, const std::string& v) { c.prediction_file = v; }},
};

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& name) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    // Strip comments and whitespace.
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto notspace = [](unsigned char ch) { return !std::isspace(ch); };
    line.erase(line.begin(), std::find_if(line.begin(), line.end(), notspace));
    line.erase(std::find_if(line.rbegin(), line.rend(), notspace).base(), line.end());
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError{name + ": unterminated section header", lineno, static_cast<int>(line.size())};
      }
      section = line.substr(1, line.size() - 2);
      const bool known = section == "run" || section == "problem" || section == "analyze" ||
                         section == "validate" || section == "solve" || section == "continue" ||
                         section == "predict" || section == "report";
      if (!known) throw ConfigError{name + ": unknown section [" + section + "]", lineno, 1};
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError{name + ": expected 'key = value'", lineno, 1};
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    key.erase(std::find_if(key.rbegin(), key.rend(), notspace).base(), key.end());
    value.erase(value.begin(), std::find_if(value.begin(), value.end(), notspace));
    if (section.empty()) throw ConfigError{name + ": key outside any section", lineno, 1};
    bool handled = false;
    for (const KeyHandler& h : kHandlers) {
      if (section == h.section && key == h.key) {
        try {
          h.apply(cfg, value);
        } catch (const std::exception& e) {
          throw ConfigError{name + ": bad value for " + key + ": " + e.what(), lineno,
                            static_cast<int>(eq + 2)};
        }
        handled = true;
        break;
      }
    }
    if (!handled) {
      throw ConfigError{name + ": unknown key '" + key + "' in section [" + section + "]", lineno, 1};
    }
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError{"cannot open config file " + path, 0, 0};
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path);
}

AmbientPolynomial effective_K(const RunConfig& cfg) {
  AmbientPolynomial K = AmbientPolynomial::parse(cfg.K_expr);
  for (const auto& r : cfg.rotations) {
    const Rotation4 rot =
        Rotation4::givens(static_cast<int>(r[0]) - 1, static_cast<int>(r[1]) - 1, r[2]);
    K = K.rotated(rot);
  }
  return K;
}

namespace {

std::ofstream open_out(const RunConfig& cfg, const std::string& file) {
  fs::create_directories(cfg.out_dir);
  std::ofstream os(fs::path(cfg.out_dir) / file);
  os.precision(17);
  return os;
}

HarmonicSpectrum constant_zonal_seed(const AmbientPolynomial& K, const SpherePoint& axis, int L,
                                     double tau) {
  // Constant ansatz v = Kbar^{-1/(1-tau)} from P_sigma v = v for constants.
  auto grid = QuadratureGrid::build(4);
  double kbar = 0;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    kbar += grid->weights()[i] * K.eval(grid->nodes()[i].vec());
  }
  kbar /= kVolS3;
  HarmonicSpectrum v = HarmonicSpectrum::zonal_zeros(L, axis);
  v.coeffs[0] = std::sqrt(kVolS3) * std::pow(kbar, -1.0 / (1.0 - tau));
  return v;
}

HarmonicSpectrum bubble_zonal_seed(const CriticalPointRecord& at, const AmbientPolynomial& K,
                                   const SpherePoint& axis, int L, double tau) {
  const std::vector<CriticalPointRecord> pts{at};
  const BlowupPrediction pred = solve_F_critical(pts, K, tau);
  const double t = std::min(std::max(pred.t_star[0], 1.2), L / 4.0);
  HarmonicSpectrum v = HarmonicSpectrum::zonal_zeros(L, axis);
  const double sign = geodesic_distance(at.location, axis) < kPi / 2 ? 1.0 : -1.0;
  for (int l = 0; l <= L; ++l) {
    double c = bubble_zonal_coeff(t, l) / at.k_value;
    if (sign < 0 && l % 2 == 1) c = -c;
    v.coeffs[l] = c;
  }
  return v;
}

struct ComparisonInputs {
  std::vector<double> taus;
  std::vector<double> heights;
  std::vector<double> tau_m_sq;
  std::vector<double> t_fit;
  std::vector<double> peak_dist;  // to the nearest cal-K^- point
};

// sqrt(tau)-Richardson on the last pair of tau*m^2 values.
double extrapolate_tau_m_sq(const ComparisonInputs& in) {
  const std::size_t n = in.taus.size();
  if (n < 2) return n ? in.tau_m_sq.back() : 0.0;
  const double s1 = std::sqrt(in.taus[n - 2]), s2 = std::sqrt(in.taus[n - 1]);
  const double f1 = in.tau_m_sq[n - 2], f2 = in.tau_m_sq[n - 1];
  return (s1 * f2 - s2 * f1) / (s1 - s2);
}

void emit_comparison(std::ostream& os, const std::string& branch_name, const ComparisonInputs& in,
                     const AmbientPolynomial& K, const std::vector<CriticalPointRecord>& k_minus,
                     double tau_end) {
  os.precision(12);
  os << "branch " << branch_name << "\n";
  if (in.taus.empty()) {
    os << "  no converged points\n";
    return;
  }
  const double tau_f = in.taus.back();
  os << "  final tau " << tau_f << "  points " << in.taus.size() << "\n";
  os << "  measured: m " << in.heights.back() << "  tau_m_sq " << in.tau_m_sq.back() << "  t_fit "
     << (in.t_fit.empty() ? 0.0 : in.t_fit.back()) << "  peak_dist " << in.peak_dist.back() << "\n";
  const double extr = extrapolate_tau_m_sq(in);
  os << "  extrapolated tau_m_sq (sqrt-tau Richardson) " << extr << "\n";
  if (!k_minus.empty()) {
    for (double c_mu : {0.25, 1.0}) {
      const BlowupPrediction pred = solve_F_critical(k_minus, K, tau_f, c_mu);
      os << "  predicted (c_mu = " << c_mu << "): t_star " << pred.t_star[0] << "  mu_pred "
         << pred.mu_pred[0] << "\n";
      if (!in.t_fit.empty() && in.t_fit.back() > 0) {
        os << "    t_fit/t_star " << in.t_fit.back() / pred.t_star[0] << "\n";
      }
    }
    const CriticalPointRecord& q = k_minus.front();
    const double K3 = q.k_value * q.k_value * q.k_value;
    const double cand_a = -4.0 * q.laplacian / K3;       // flux-limit route
    const double cand_b = -q.laplacian / (2.0 * K3);     // reduced-model route
    os << "  candidate constants: flux-route -4 LapK/K^3 = " << cand_a
       << ", reduced-route -LapK/(2K^3) = " << cand_b << "\n";
    const double da = std::abs(extr - cand_a) / std::abs(cand_a);
    const double db = std::abs(extr - cand_b) / std::abs(cand_b);
    os << "  nearest candidate: " << (da <= db ? "flux-route" : "reduced-route")
       << " (relative distance " << std::min(da, db) << "; other " << std::max(da, db) << ")\n";
  }
  (void)tau_end;
}

}  // namespace

int cmd_analyze(const RunConfig& cfg) {
  const AmbientPolynomial K = effective_K(cfg);
  std::vector<CriticalPointRecord> points;
  try {
    points = find_critical_points(K, cfg.n_starts, cfg.seed);
  } catch (const std::exception& e) {
    std::cerr << "analyze: " << e.what() << "\n";
    return 2;
  }
  DegreeReport rep = degree_report_from_points(points, K);
  auto os = open_out(cfg, "analysis.txt");
  os << "K = " << K.to_string() << "\n";
  write_degree_report(os, rep);
  if (!rep.morse_ok) {
    std::cerr << "analyze: K is degenerate (no Morse structure); report written\n";
    return 2;
  }
  std::cout << "Index(K) = " << rep.index << ", in_A = " << (rep.in_A ? 1 : 0) << ", |K^-| = "
            << rep.k_minus.size() << "\n";
  return 0;
}

int cmd_validate(const RunConfig& cfg) {
  bool all_pass = true;
  bool inconclusive = false;
  auto summary = open_out(cfg, "validate_summary.txt");
  summary.precision(12);

  // Spectral identity suite at moderate resolution.
  {
    const int L = 24;
    auto grid = QuadratureGrid::build_order(3 * L + 1);
    // <delta,delta> = |S^3| and P delta = delta^2 for a few rates.
    double worst_pair = 0, worst_eq = 0;
    for (double t : {1.5, 3.0, 6.0}) {
      BubbleParams b(SpherePoint::axis(3), t);
      const SphericalField f = sample(grid, [&](const SpherePoint& p) { return eval_bubble(b, p); });
      const HarmonicSpectrum s = forward_transform(f, L);
      worst_pair = std::max(worst_pair, std::abs(hsigma_inner(s, s) / kVolS3 - 1.0));
      const SphericalField f2 =
          sample(grid, [&](const SpherePoint& p) { const double v = eval_bubble(b, p); return v * v; });
      const HarmonicSpectrum s2 = forward_transform(f2, L);
      HarmonicSpectrum lhs = apply_p_half(s);
      lhs -= s2;
      worst_eq = std::max(worst_eq, lhs.l2_norm() / s2.l2_norm());
    }
    const bool p1 = worst_pair <= 1e-5;
    const bool p2 = worst_eq <= 1e-6;
    summary << "identity p1p1 (<delta,delta> = |S^3|): max rel err " << worst_pair << " -> "
            << (p1 ? "pass" : "FAIL") << "\n";
    summary << "identity bubble-eq (P delta = delta^2): max rel L2 err " << worst_eq << " -> "
            << (p2 ? "pass" : "FAIL") << "\n";
    all_pass = all_pass && p1 && p2;
  }

  // Interaction/derivative asymptotics.
  AsymptoticsConfig acfg;
  acfg.taus = cfg.taus;
  acfg.separation = cfg.separation;
  acfg.rel_tol = cfg.quad_rel_tol;
  const AsymptoticsReport rep = validate_asymptotics(acfg);
  {
    auto csv = open_out(cfg, "asymptotics.csv");
    write_asymptotics_csv(csv, rep);
    auto sum2 = open_out(cfg, "asymptotics_summary.txt");
    write_asymptotics_summary(sum2, rep);
  }
  for (const AsymptoticsRecord& r : rep.records) {
    if (r.inconclusive) {
      summary << "identity " << r.identity << ": INCONCLUSIVE\n";
      inconclusive = true;
      continue;
    }
    bool pass = true;
    // The smallest-tau sample carries the asymptotic claim.
    const AsymptoticsSample* last = nullptr;
    for (const AsymptoticsSample& s : r.samples) {
      if (s.ok && (!last || s.tau < last->tau)) last = &s;
    }
    if (r.order_only) {
      pass = r.exponent_valid && r.remainder_exponent >= 0.75 && r.remainder_exponent <= 1.5;
      summary << "identity " << r.identity << " (order-only): value exponent "
              << r.remainder_exponent << " -> " << (pass ? "pass" : "FAIL") << "\n";
    } else {
      const double dev = last ? std::abs(last->ratio - 1.0) : 1e9;
      pass = dev <= 0.1;
      if (r.identity == "a.2" || r.identity == "a.1") {
        pass = pass && r.exponent_valid && r.remainder_exponent >= 1.0;
      }
      summary << "identity " << r.identity << ": |ratio-1| at smallest tau " << dev
              << (r.exponent_valid ? " remainder exponent " + std::to_string(r.remainder_exponent) : "")
              << " -> " << (pass ? "pass" : "FAIL") << "\n";
    }
    all_pass = all_pass && pass;
  }

  // Pohozaev flux limits.
  {
    auto csv = open_out(cfg, "pohozaev.csv");
    const AmbientPolynomial zero;
    const Prop2Report r1 = prop2_check(1.0, zero, cfg.pohozaev_deltas);
    write_prop2_report(csv, r1, "0");
    const Prop2Report rm3 = prop2_check(-3.0, zero, cfg.pohozaev_deltas);
    write_prop2_report(csv, rm3, "0");
    const Prop2Report r2 = prop2_check(2.0, zero, cfg.pohozaev_deltas);
    write_prop2_report(csv, r2, "0");
    const AmbientPolynomial ax = AmbientPolynomial::parse("x1");
    const Prop2Report r1a = prop2_check(1.0, ax, cfg.pohozaev_deltas);
    write_prop2_report(csv, r1a, "x1");
    const bool p1 = r1.rel_deviation <= 0.01;
    // Three-point linearity in M.
    const double lin_resid =
        std::abs(r1.extrapolated * (-3.0) - rm3.extrapolated) / std::abs(rm3.extrapolated);
    const double lin_resid2 = std::abs(r1.extrapolated * 2.0 - r2.extrapolated) / std::abs(r2.extrapolated);
    const bool p2 = std::max(lin_resid, lin_resid2) <= 1e-3;
    summary << "pohozaev prop2 M=1: rel deviation " << r1.rel_deviation << " -> "
            << (p1 ? "pass" : "FAIL") << "\n";
    summary << "pohozaev linearity in M: residual " << std::max(lin_resid, lin_resid2) << " -> "
            << (p2 ? "pass" : "FAIL") << "\n";
    all_pass = all_pass && p1 && p2;
  }

  summary << (all_pass ? "ALL HARD IDENTITIES PASS\n" : "VALIDATION NOT PASSED\n");
  if (inconclusive) summary << "some identities inconclusive (quadrature resolution)\n";
  std::cout << (all_pass ? "validate: pass" : "validate: NOT PASSED") << "\n";
  return all_pass && !inconclusive ? 0 : 3;
}

namespace {

struct BranchSpec {
  std::string name;
  HarmonicSpectrum seed;
};

int run_branches(const RunConfig& cfg, const AmbientPolynomial& K,
                 const std::vector<CriticalPointRecord>& points) {
  const SpherePoint axis(cfg.zonal_axis[0], cfg.zonal_axis[1], cfg.zonal_axis[2], cfg.zonal_axis[3]);
  std::vector<CriticalPointRecord> k_minus;
  for (const CriticalPointRecord& r : points) {
    if (r.cls == CriticalClass::kMinus) k_minus.push_back(r);
  }
  const int L = cfg.zonal ? cfg.L_zonal : cfg.L;

  std::vector<BranchSpec> branches;
  if (cfg.seed_mode == "constant" || cfg.seed_mode == "both") {
    if (cfg.zonal) {
      branches.push_back({"constant", constant_zonal_seed(K, axis, L, cfg.tau_start)});
    } else {
      HarmonicSpectrum v = HarmonicSpectrum::zeros(L);
      v.coeffs[0] = std::sqrt(kVolS3) * 0.5;
      branches.push_back({"constant", v});
    }
  }
  if (cfg.seed_mode == "bubble" || cfg.seed_mode == "both") {
    int idx = 0;
    for (const CriticalPointRecord& q : k_minus) {
      if (cfg.zonal && std::min(geodesic_distance(q.location, axis),
                                kPi - geodesic_distance(q.location, axis)) > 1e-6) {
        continue;  // zonal branches need the peak on the axis
      }
      if (cfg.zonal) {
        branches.push_back({"bubble_" + std::to_string(idx),
                            bubble_zonal_seed(q, K, axis, L, cfg.tau_start)});
      } else {
        auto grid = QuadratureGrid::build_order(3 * L + 1);
        const BlowupPrediction pred = solve_F_critical({q}, K, cfg.tau_start);
        BubbleParams b(q.location, std::min(std::max(pred.t_star[0], 1.2), L / 4.0));
        const SphericalField f = sample(grid, [&](const SpherePoint& p) {
          return eval_bubble(b, p) / q.k_value;
        });
        branches.push_back({"bubble_" + std::to_string(idx), forward_transform(f, L)});
      }
      ++idx;
    }
  }

  SolverOptions opts;
  opts.rtol = cfg.rtol;

  auto comparison = open_out(cfg, "comparison.txt");
  comparison << "continuation comparison report\n";
  comparison << "K = " << K.to_string() << "\n";
  bool any_ok = false;
  for (const BranchSpec& br : branches) {
    SolverState init;
    init.v = br.seed;
    init.tau = cfg.tau_start;
    const ContinuationResult res =
        continuation(cfg.tau_start, cfg.tau_end, cfg.n_steps, K, init, opts, points);
    {
      auto csv = open_out(cfg, "branch_" + br.name + ".csv");
      write_branch_csv(csv, res);
    }
    ComparisonInputs in;
    auto plot_m = open_out(cfg, "plot_logm_logtau_" + br.name + ".dat");
    auto plot_d = open_out(cfg, "plot_peakdist_" + br.name + ".dat");
    plot_m.precision(17);
    plot_d.precision(17);
    for (const BranchPoint& bp : res.points) {
      if (!bp.state.converged || bp.diag.peaks.empty()) continue;
      const PeakInfo& pk = bp.diag.peaks.front();
      in.taus.push_back(bp.state.tau);
      in.heights.push_back(pk.height);
      in.tau_m_sq.push_back(pk.tau_m_sq);
      if (bp.fit_valid) in.t_fit.push_back(bp.fit.fit.rates[0]);
      double dist = 0;
      if (!k_minus.empty()) {
        dist = 1e9;
        for (const CriticalPointRecord& q : k_minus) {
          dist = std::min(dist, geodesic_distance(pk.location, q.location));
        }
      }
      in.peak_dist.push_back(dist);
      plot_m << std::log(bp.state.tau) << " " << std::log(pk.height) << "\n";
      plot_d << bp.state.tau << " " << dist << "\n";
    }
    if (!in.taus.empty()) any_ok = true;
    emit_comparison(comparison, br.name, in, K, k_minus, cfg.tau_end);
    if (!res.note.empty()) comparison << "  note: " << res.note << "\n";
  }
  if (!any_ok) {
    std::cerr << "continue: all branches failed\n";
    return 4;
  }
  std::cout << "continue: " << branches.size() << " branch(es) written to " << cfg.out_dir << "\n";
  return 0;
}

}  // namespace

int cmd_solve(const RunConfig& cfg) {
  const AmbientPolynomial K = effective_K(cfg);
  const SpherePoint axis(cfg.zonal_axis[0], cfg.zonal_axis[1], cfg.zonal_axis[2], cfg.zonal_axis[3]);
  SolverOptions opts;
  opts.rtol = cfg.rtol;
  HarmonicSpectrum seed;
  if (cfg.seed_mode == "bubble") {
    const std::vector<CriticalPointRecord> points = find_critical_points(K, cfg.n_starts, cfg.seed);
    const CriticalPointRecord* q = nullptr;
    for (const CriticalPointRecord& r : points) {
      if (r.cls == CriticalClass::kMinus) {
        q = &r;
        break;
      }
    }
    if (!q) {
      std::cerr << "solve: no cal-K^- point to seed a bubble\n";
      return 4;
    }
    if (cfg.zonal) {
      seed = bubble_zonal_seed(*q, K, axis, cfg.L_zonal, cfg.tau);
    } else {
      auto grid = QuadratureGrid::build_order(3 * cfg.L + 1);
      const BlowupPrediction pred = solve_F_critical({*q}, K, cfg.tau);
      BubbleParams b(q->location, std::min(std::max(pred.t_star[0], 1.2), cfg.L / 4.0));
      const double kq = q->k_value;
      seed = forward_transform(
          sample(grid, [&](const SpherePoint& p) { return eval_bubble(b, p) / kq; }), cfg.L);
    }
  } else {
    if (cfg.zonal) {
      seed = constant_zonal_seed(K, axis, cfg.L_zonal, cfg.tau);
    } else {
      seed = HarmonicSpectrum::zeros(cfg.L);
      seed.coeffs[0] = std::sqrt(kVolS3) * 0.5;
    }
  }
  SolverState st;
  try {
    st = cfg.zonal ? axisym_solve(K, axis, cfg.tau, seed, opts) : newton_solve(seed, cfg.tau, K, opts);
  } catch (const std::exception& e) {
    std::cerr << "solve: " << e.what() << "\n";
    return 4;
  }
  {
    auto os = open_out(cfg, "solution.spectrum");
    save_spectrum(os, st.v);
    auto sum = open_out(cfg, "solve_summary.txt");
    sum << "tau " << st.tau << "\nconverged " << st.converged << "\npositive " << st.positive
        << "\nresidual " << st.residual_norm << "\nrhs " << st.rhs_norm << "\nnewton_iters "
        << st.newton_iters << "\nL " << st.L << "\n";
  }
  if (!st.converged || !st.positive) {
    std::cerr << "solve: " << (st.converged ? "positivity failure" : "no convergence") << "\n";
    return 4;
  }
  std::cout << "solve: converged, residual " << st.residual_norm << "\n";
  return 0;
}

int cmd_continue(const RunConfig& cfg) {
  const AmbientPolynomial K = effective_K(cfg);
  std::vector<CriticalPointRecord> points;
  try {
    points = find_critical_points(K, cfg.n_starts, cfg.seed);
  } catch (const std::exception& e) {
    std::cerr << "continue: " << e.what() << "\n";
    return 2;
  }
  return run_branches(cfg, K, points);
}

int cmd_predict(const RunConfig& cfg) {
  const AmbientPolynomial K = effective_K(cfg);
  const std::vector<CriticalPointRecord> points = find_critical_points(K, cfg.n_starts, cfg.seed);
  std::vector<CriticalPointRecord> k_minus;
  for (const CriticalPointRecord& r : points) {
    if (r.cls == CriticalClass::kMinus) k_minus.push_back(r);
  }
  if (k_minus.empty()) {
    std::cerr << "predict: cal-K^- is empty, nothing to predict\n";
    return 2;
  }
  if (k_minus.size() > 20) {
    std::cerr << "predict: more than 20 points in cal-K^-\n";
    return 2;
  }
  auto os = open_out(cfg, "predictions.txt");
  int written = 0;
  const int s = static_cast<int>(k_minus.size());
  for (unsigned mask = 1; mask < (1u << s); ++mask) {
    std::vector<CriticalPointRecord> subset;
    for (int b = 0; b < s; ++b) {
      if (mask & (1u << b)) subset.push_back(k_minus[b]);
    }
    const InteractionMatrix M = build_matrix_M(subset, K);
    if (!(M.mu_min > 0)) continue;
    for (double c_mu : {0.25, 1.0}) {
      os << "subset";
      for (std::size_t i = 0; i < subset.size(); ++i) {
        os << " (" << subset[i].location[0] << "," << subset[i].location[1] << ","
           << subset[i].location[2] << "," << subset[i].location[3] << ")";
      }
      os << "\n";
      write_prediction(os, solve_F_critical(subset, K, cfg.tau, c_mu));
      ++written;
    }
  }
  std::cout << "predict: " << written << " prediction block(s) written\n";
  return written > 0 ? 0 : 2;
}

int cmd_report(const RunConfig& cfg) {
  if (cfg.branch_csv.empty()) {
    std::cerr << "report: branch_csv must be set in [report]\n";
    return 1;
  }
  std::ifstream f(cfg.branch_csv);
  if (!f) {
    std::cerr << "report: cannot open " << cfg.branch_csv << "\n";
    return 1;
  }
  const AmbientPolynomial K = effective_K(cfg);
  const std::vector<CriticalPointRecord> points = find_critical_points(K, cfg.n_starts, cfg.seed);
  std::vector<CriticalPointRecord> k_minus;
  for (const CriticalPointRecord& r : points) {
    if (r.cls == CriticalClass::kMinus) k_minus.push_back(r);
  }
  ComparisonInputs in;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("tau,", 0) == 0) continue;
    std::istringstream is(line);
    std::vector<double> cols;
    std::string cell;
    while (std::getline(is, cell, ',')) cols.push_back(cell.empty() ? 0.0 : std::stod(cell));
    if (cols.size() < 19) continue;
    in.taus.push_back(cols[0]);
    in.heights.push_back(cols[8]);
    in.tau_m_sq.push_back(cols[9]);
    in.t_fit.push_back(cols[13]);
    double dist = 0;
    const double pknorm = std::sqrt(cols[4] * cols[4] + cols[5] * cols[5] + cols[6] * cols[6] +
                                    cols[7] * cols[7]);
    if (!k_minus.empty() && std::abs(pknorm - 1.0) < 1e-6) {
      const SpherePoint pk(cols[4], cols[5], cols[6], cols[7]);
      dist = 1e9;
      for (const CriticalPointRecord& q : k_minus) {
        dist = std::min(dist, geodesic_distance(pk, q.location));
      }
    }
    in.peak_dist.push_back(dist);
  }
  auto os = open_out(cfg, "comparison.txt");
  os << "comparison report (from " << cfg.branch_csv << ")\n";
  emit_comparison(os, "from_csv", in, K, k_minus, in.taus.empty() ? 0.0 : in.taus.back());
  std::cout << "report: comparison written\n";
  return 0;
}

int run_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty()) {
    std::cerr << "usage: nir3 <analyze|validate|solve|continue|predict|report> [--config <path>] "
                 "[--out <dir>] [--seed <u64>] [--L <int>] [--zonal]\n";
    return 1;
  }
  const std::string cmd = args[0];
  RunConfig cfg;
  try {
    std::optional<std::string> config_path;
    for (std::size_t i = 1; i < args.size(); ++i) {
      const std::string& a = args[i];
      const auto need = [&](const char* flag) -> std::string {
        if (i + 1 >= args.size()) throw ConfigError{std::string("missing value for ") + flag, 0, 0};
        return args[++i];
      };
      if (a == "--config") config_path = need("--config");
      else if (a == "--out") cfg.out_dir = need("--out");
      else if (a == "--seed") cfg.seed = std::stoull(need("--seed"));
      else if (a == "--L") cfg.L = std::stoi(need("--L"));
      else if (a == "--zonal") cfg.zonal = true;
      else throw ConfigError{"unknown flag " + a, 0, 0};
    }
    if (config_path) {
      RunConfig file_cfg = parse_config_file(*config_path);
      // Command line overrides the file (values validated by the first pass).
      for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--out") file_cfg.out_dir = args[i + 1];
        else if (args[i] == "--seed") file_cfg.seed = std::stoull(args[i + 1]);
        else if (args[i] == "--L") file_cfg.L = std::stoi(args[i + 1]);
        else if (args[i] == "--zonal") file_cfg.zonal = true;
      }
      cfg = file_cfg;
    }
    effective_K(cfg);  // validate the K expression early (parse errors are config errors)
  } catch (const ConfigError& e) {
    std::cerr << "config error";
    if (e.line > 0) std::cerr << " (line " << e.line << ", column " << e.column << ")";
    std::cerr << ": " << e.message << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (cmd == "analyze") return cmd_analyze(cfg);
    if (cmd == "validate") return cmd_validate(cfg);
    if (cmd == "solve") return cmd_solve(cfg);
    if (cmd == "continue") return cmd_continue(cfg);
    if (cmd == "predict") return cmd_predict(cfg);
    if (cmd == "report") return cmd_report(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.message << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << cmd << ": " << e.what() << "\n";
    return 4;
  }
  std::cerr << "unknown command '" << cmd << "'\n";
  return 1;
}

}  // namespace nir3::cli
