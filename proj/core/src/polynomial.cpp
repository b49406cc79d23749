#include "nir3/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace nir3 {

namespace {
double pow_int(double x, int n) {
  double r = 1;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}
}  // namespace

AmbientPolynomial::AmbientPolynomial(std::vector<Monomial> terms) : terms_(std::move(terms)) { normalize(); }

AmbientPolynomial AmbientPolynomial::constant(double c) {
  return AmbientPolynomial({Monomial{c, {0, 0, 0, 0}}});
}

void AmbientPolynomial::normalize() {
  std::map<std::array<int, 4>, double> acc;
  for (const Monomial& m : terms_) acc[m.powers] += m.coeff;
  terms_.clear();
  for (const auto& [p, c] : acc) {
    if (c != 0.0) terms_.push_back(Monomial{c, p});
  }
}

int AmbientPolynomial::degree() const {
  int d = 0;
  for (const Monomial& m : terms_) d = std::max(d, m.powers[0] + m.powers[1] + m.powers[2] + m.powers[3]);
  return d;
}

std::string AmbientPolynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const Monomial& m : terms_) {
    if (!first) os << (m.coeff < 0 ? " - " : " + ");
    else if (m.coeff < 0) os << "-";
    first = false;
    const double a = std::abs(m.coeff);
    bool printed = false;
    if (a != 1.0 || m.powers == std::array<int, 4>{0, 0, 0, 0}) {
      os << a;
      printed = true;
    }
    for (int i = 0; i < 4; ++i) {
      if (m.powers[i] == 0) continue;
      if (printed) os << "*";
      os << "x" << (i + 1);
      if (m.powers[i] > 1) os << "^" << m.powers[i];
      printed = true;
    }
  }
  return os.str();
}

double AmbientPolynomial::eval(const Vec4& x) const {
  double s = 0;
  for (const Monomial& m : terms_) {
    double v = m.coeff;
    for (int i = 0; i < 4; ++i) v *= pow_int(x[i], m.powers[i]);
    s += v;
  }
  return s;
}

Vec4 AmbientPolynomial::gradient(const Vec4& x) const {
  Vec4 g;
  for (const Monomial& m : terms_) {
    for (int d = 0; d < 4; ++d) {
      if (m.powers[d] == 0) continue;
      double v = m.coeff * m.powers[d];
      for (int i = 0; i < 4; ++i) v *= pow_int(x[i], i == d ? m.powers[i] - 1 : m.powers[i]);
      g[d] += v;
    }
  }
  return g;
}

std::array<double, 16> AmbientPolynomial::hessian(const Vec4& x) const {
  std::array<double, 16> h{};
  for (const Monomial& m : terms_) {
    for (int a = 0; a < 4; ++a) {
      for (int b = a; b < 4; ++b) {
        auto p = m.powers;
        double c = m.coeff;
        if (a == b) {
          if (p[a] < 2) continue;
          c *= p[a] * (p[a] - 1);
          p[a] -= 2;
        } else {
          if (p[a] < 1 || p[b] < 1) continue;
          c *= p[a] * p[b];
          p[a] -= 1;
          p[b] -= 1;
        }
        for (int i = 0; i < 4; ++i) c *= pow_int(x[i], p[i]);
        h[a * 4 + b] += c;
        if (a != b) h[b * 4 + a] += c;
      }
    }
  }
  return h;
}

double AmbientPolynomial::ambient_laplacian(const Vec4& x) const {
  const auto h = hessian(x);
  return h[0] + h[5] + h[10] + h[15];
}

AmbientPolynomial AmbientPolynomial::operator+(const AmbientPolynomial& o) const {
  std::vector<Monomial> t = terms_;
  t.insert(t.end(), o.terms_.begin(), o.terms_.end());
  return AmbientPolynomial(std::move(t));
}

AmbientPolynomial AmbientPolynomial::operator*(const AmbientPolynomial& o) const {
  std::vector<Monomial> t;
  t.reserve(terms_.size() * o.terms_.size());
  for (const Monomial& a : terms_) {
    for (const Monomial& b : o.terms_) {
      Monomial m;
      m.coeff = a.coeff * b.coeff;
      for (int i = 0; i < 4; ++i) m.powers[i] = a.powers[i] + b.powers[i];
      t.push_back(m);
    }
  }
  return AmbientPolynomial(std::move(t));
}

AmbientPolynomial AmbientPolynomial::scaled(double c) const {
  std::vector<Monomial> t = terms_;
  for (Monomial& m : t) m.coeff *= c;
  return AmbientPolynomial(std::move(t));
}

AmbientPolynomial AmbientPolynomial::rotated(const Rotation4& r) const {
  // Substitute x_i -> sum_j R_ji x_j (i.e. x -> R^T x) monomial by monomial.
  std::array<AmbientPolynomial, 4> lin;
  for (int i = 0; i < 4; ++i) {
    std::vector<Monomial> t;
    for (int j = 0; j < 4; ++j) {
      if (r.m[j * 4 + i] == 0.0) continue;
      Monomial m;
      m.coeff = r.m[j * 4 + i];
      m.powers[j] = 1;
      t.push_back(m);
    }
    lin[i] = AmbientPolynomial(std::move(t));
  }
  AmbientPolynomial out;
  for (const Monomial& m : terms_) {
    AmbientPolynomial term = AmbientPolynomial::constant(m.coeff);
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < m.powers[i]; ++k) term = term * lin[i];
    out = out + term;
  }
  return out;
}

double AmbientPolynomial::c2_sample_norm(int n_samples) const {
  double best = 0;
  for (const SpherePoint& p : low_discrepancy_points(n_samples)) {
    const Vec4 x = p.vec();
    double s = std::abs(eval(x));
    const Vec4 g = gradient(x);
    s += norm(g);
    const auto h = hessian(x);
    double hn = 0;
    for (double v : h) hn += v * v;
    s += std::sqrt(hn);
    best = std::max(best, s);
  }
  return best;
}

double AmbientPolynomial::min_on_sphere_sampled(int n_samples) const {
  double m = eval(SpherePoint::axis(3).vec());
  for (const SpherePoint& p : low_discrepancy_points(n_samples)) m = std::min(m, eval(p.vec()));
  return m;
}

namespace {

struct Parser {
  const std::string& s;
  std::size_t pos = 0;

  explicit Parser(const std::string& str) : s(str) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::invalid_argument("polynomial parse error at column " + std::to_string(pos + 1) + ": " + msg);
  }

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }

  // Accepts '+'/'-' and the UTF-8 minus sign U+2212 (e2 88 92).
  int sign_token() {
    skip_ws();
    if (pos >= s.size()) return 0;
    if (s[pos] == '+') {
      ++pos;
      return +1;
    }
    if (s[pos] == '-') {
      ++pos;
      return -1;
    }
    if (pos + 2 < s.size() && static_cast<unsigned char>(s[pos]) == 0xe2 &&
        static_cast<unsigned char>(s[pos + 1]) == 0x88 && static_cast<unsigned char>(s[pos + 2]) == 0x92) {
      pos += 3;
      return -1;
    }
    return 0;
  }

  double number() {
    skip_ws();
    std::size_t start = pos;
    while (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.' ||
                              s[pos] == 'e' || s[pos] == 'E' ||
                              ((s[pos] == '+' || s[pos] == '-') && pos > start &&
                               (s[pos - 1] == 'e' || s[pos - 1] == 'E')))) {
      ++pos;
    }
    if (pos == start) fail("expected a number");
    try {
      return std::stod(s.substr(start, pos - start));
    } catch (const std::exception&) {
      pos = start;
      fail("malformed number");
    }
    return 0;  // unreachable
  }

  Monomial term() {
    Monomial m;
    m.coeff = 1.0;
    bool any = false;
    bool expect_factor = true;
    while (true) {
      skip_ws();
      if (pos >= s.size()) break;
      const char c = s[pos];
      if (c == '*') {
        ++pos;
        expect_factor = true;
        continue;
      }
      if (c == 'x' || c == 'X') {
        ++pos;
        if (pos >= s.size() || s[pos] < '1' || s[pos] > '4') fail("expected coordinate index 1..4 after 'x'");
        const int idx = s[pos] - '1';
        ++pos;
        int e = 1;
        skip_ws();
        if (pos < s.size() && s[pos] == '^') {
          ++pos;
          skip_ws();
          std::size_t st = pos;
          while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
          if (pos == st) fail("expected an integer exponent after '^'");
          e = std::stoi(s.substr(st, pos - st));
        }
        m.powers[idx] += e;
        any = true;
        expect_factor = false;
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        if (!expect_factor && any) break;  // implicit end of term (e.g. "2 3" is rejected below)
        m.coeff *= number();
        any = true;
        expect_factor = false;
        continue;
      }
      break;
    }
    if (!any) fail("expected a term");
    return m;
  }

  AmbientPolynomial parse() {
    std::vector<Monomial> terms;
    skip_ws();
    if (pos >= s.size()) fail("empty expression");
    int sg = sign_token();
    if (sg == 0) sg = 1;
    while (true) {
      Monomial m = term();
      m.coeff *= sg;
      terms.push_back(m);
      skip_ws();
      if (pos >= s.size()) break;
      sg = sign_token();
      if (sg == 0) fail("expected '+' or '-' between terms");
    }
    return AmbientPolynomial(std::move(terms));
  }
};

}  // namespace

AmbientPolynomial AmbientPolynomial::parse(const std::string& expr) { return Parser(expr).parse(); }

SphereDerivatives sphere_derivatives(const AmbientPolynomial& K, const SpherePoint& p) {
  SphereDerivatives out;
  const Vec4 x = p.vec();
  out.value = K.eval(x);
  const Vec4 g = K.gradient(x);
  const auto h = K.hessian(x);
  const double radial = dot(g, x);
  out.gradient = g - radial * x;

  const auto frame = tangent_frame(p);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      double hab = 0;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) hab += frame[a][i] * h[i * 4 + j] * frame[b][j];
      out.hessian[a * 3 + b] = hab - (a == b ? radial : 0.0);
    }
  }

  double hpp = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) hpp += x[i] * h[i * 4 + j] * x[j];
  out.laplacian = K.ambient_laplacian(x) - hpp - 3.0 * radial;
  return out;
}

}  // namespace nir3
