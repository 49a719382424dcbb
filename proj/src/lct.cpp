#include "krf/lct.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include "krf/errors.hpp"

namespace krf {

int CurveGerm::weight_z() const {
  int a = 0;
  for (const auto& w : weights)
    if (w.axis == Axis::Z) a += w.multiplicity;
  return a;
}

int CurveGerm::weight_w() const {
  int b = 0;
  for (const auto& w : weights)
    if (w.axis == Axis::W) b += w.multiplicity;
  return b;
}

Poly2 CurveGerm::full() const { return poly * Poly2::monomial(1, weight_z(), weight_w()); }

namespace {

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  Poly2 parse() {
    Poly2 p = expr();
    skip();
    if (pos_ != s_.size()) error("unexpected '" + std::string(1, s_[pos_]) + "'");
    return p;
  }

 private:
  std::string_view s_;
  size_t pos_ = 0;

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::ParseError, what + " at offset " + std::to_string(pos_) + " in \"" + std::string(s_) + "\"");
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Poly2 expr() {
    Poly2 acc;
    bool first = true;
    for (;;) {
      skip();
      int sign = 1;
      if (eat('+')) sign = 1;
      else if (eat('-')) sign = -1;
      else if (!first) break;
      Poly2 t = term();
      acc = sign > 0 ? acc + t : acc - t;
      first = false;
    }
    return acc;
  }

  Poly2 term() {
    Poly2 acc = power();
    for (;;) {
      if (eat('*')) {
        acc = acc * power();
      } else if (eat('/')) {
        const Poly2 d = power();
        if (!d.is_constant() || d.is_zero()) error("division by a non-constant or zero");
        acc = acc.scaled(1 / d.constant_term());
      } else {
        break;
      }
    }
    return acc;
  }

  Poly2 power() {
    Poly2 base = atom();
    if (eat('^')) {
      skip();
      size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) error("expected exponent");
      if (pos_ - start > 4) error("exponent too large");
      const int e = std::stoi(std::string(s_.substr(start, pos_ - start)));
      if (e > 256) error("exponent too large");
      base = base.pow(e);
    }
    return base;
  }

  Poly2 atom() {
    skip();
    if (pos_ >= s_.size()) error("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Poly2 p = expr();
      if (!eat(')')) error("expected ')'");
      return p;
    }
    if (c == 'z') {
      ++pos_;
      return Poly2::z();
    }
    if (c == 'w') {
      ++pos_;
      return Poly2::w();
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      std::string digits(s_.substr(start, pos_ - start));
      int frac = 0;
      if (pos_ < s_.size() && s_[pos_] == '.') {
        ++pos_;
        size_t fs = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        digits += std::string(s_.substr(fs, pos_ - fs));
        frac = static_cast<int>(pos_ - fs);
      }
      if (digits.empty()) error("malformed number");
      mpz_class den = 1;
      for (int i = 0; i < frac; ++i) den *= 10;
      Rational q(mpz_class(digits, 10), den);
      q.canonicalize();
      return Poly2::constant(q);
    }
    error("unexpected '" + std::string(1, c) + "'");
  }
};

}  // namespace

CurveGerm parse_germ(std::string_view text, bool require_vanishing) {
  CurveGerm g;
  g.poly = Parser(text).parse();
  if (g.poly.is_zero()) fail(ErrorCode::ParseError, "the zero polynomial is not a germ");
  if (require_vanishing && g.poly.constant_term() != 0)
    fail(ErrorCode::NotAGermAtOrigin, "constant term " + g.poly.constant_term().get_str() + " is nonzero");
  return g;
}

AxisWeight parse_weight(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) fail(ErrorCode::ParseError, "weight must look like z:2");
  const auto axis = text.substr(0, colon);
  AxisWeight w;
  if (axis == "z") w.axis = Axis::Z;
  else if (axis == "w") w.axis = Axis::W;
  else fail(ErrorCode::ParseError, "unknown axis '" + std::string(axis) + "'");
  const std::string m(text.substr(colon + 1));
  if (m.empty() || !std::all_of(m.begin(), m.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    fail(ErrorCode::ParseError, "weight multiplicity must be a nonnegative integer");
  if (m.size() > 4) fail(ErrorCode::ParseError, "weight multiplicity too large");
  w.multiplicity = std::stoi(m);
  return w;
}

int multiplicity(const CurveGerm& g) { return g.poly.order(); }

int weight_multiplicity(const CurveGerm& g) { return g.weight_z() + g.weight_w(); }

Rational multiplicity_bound(const CurveGerm& g) {
  const Poly2 f = g.full();
  const int k = f.order();
  if (k <= 0) return 1;
  int best = 0;
  for (const auto& [key, c] : f.terms())
    if (key.first + key.second == k) best = std::max(best, std::max(key.first, key.second));
  return ratio(1, best);
}

std::string_view to_string(LctMethod m) {
  switch (m) {
    case LctMethod::Pattern: return "pattern";
    case LctMethod::Newton: return "newton";
    case LctMethod::Resolution: return "resolution";
    case LctMethod::OracleBracket: return "oracle-bracket";
  }
  return "?";
}

LctMethod parse_method(std::string_view s) {
  if (s == "pattern") return LctMethod::Pattern;
  if (s == "newton") return LctMethod::Newton;
  if (s == "resolution") return LctMethod::Resolution;
  if (s == "oracle" || s == "oracle-bracket") return LctMethod::OracleBracket;
  fail(ErrorCode::InvalidArgument, "unknown lct method '" + std::string(s) + "'");
}

std::string Witness::describe() const {
  std::ostringstream os;
  if (kind == "exceptional") os << "exceptional divisor v=" << v << " k=" << k;
  else if (kind == "component") os << "component of multiplicity " << v;
  else if (kind == "axis") os << "axis weight " << v;
  else if (kind == "newton") os << "newton diagonal t0=" << t0.get_str();
  else os << kind;
  return os.str();
}

std::string LctResult::to_string() const {
  std::ostringstream os;
  os << (infinite ? std::string("inf") : value.get_str()) << " [" << krf::to_string(method) << "; "
     << witness.describe() << (exact ? "" : "; bound") << "]";
  return os.str();
}

namespace {

LctResult unit_result(LctMethod m) {
  LctResult r;
  r.infinite = true;
  r.method = m;
  r.witness.kind = "unit";
  return r;
}

}  // namespace

LctResult lct_newton(const CurveGerm& g) {
  const Poly2 f = g.full();
  if (f.constant_term() != 0) return unit_result(LctMethod::Newton);
  std::vector<std::pair<int, int>> pts;
  for (const auto& [k, c] : f.terms()) pts.push_back(k);

  // Smallest t with (t, t) in conv(support) + R^2_+.
  Rational t0 = -1;
  auto consider = [&](const Rational& t) {
    if (t0 < 0 || t < t0) t0 = t;
  };
  for (auto [a, b] : pts) consider(std::max(a, b));
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = 0; j < pts.size(); ++j) {
      const int d1 = pts[i].first - pts[i].second, d2 = pts[j].first - pts[j].second;
      if (d1 >= 0 || d2 <= 0) continue;
      const Rational lam = ratio(d2, d2 - d1);  // weight on point i
      consider(lam * pts[i].first + (1 - lam) * pts[j].first);
    }

  // Compact edges of the Newton polygon: lower-left convex chain from the steepest to the flattest vertex.
  std::sort(pts.begin(), pts.end());
  std::vector<std::pair<int, int>> chain;
  for (auto p : pts) {
    if (!chain.empty() && chain.back().first == p.first) continue;  // keep smallest b per a
    if (!chain.empty() && p.second >= chain.back().second) continue;
    while (chain.size() >= 2) {
      const auto o = chain[chain.size() - 2], a = chain.back();
      const long cross = static_cast<long>(a.first - o.first) * (p.second - o.second) -
                         static_cast<long>(a.second - o.second) * (p.first - o.first);
      if (cross <= 0) chain.pop_back();
      else break;
    }
    chain.push_back(p);
  }
  bool degenerate = false;
  for (size_t e = 0; e + 1 < chain.size(); ++e) {
    const auto [a1, b1] = chain[e];
    const auto [a2, b2] = chain[e + 1];
    const int gcd = std::gcd(a2 - a1, b1 - b2);
    const int p = (a2 - a1) / gcd, q = (b1 - b2) / gcd;
    UPoly edge(gcd + 1);
    for (int j = 0; j <= gcd; ++j) edge[j] = f.coeff(a1 + j * p, b1 - j * q);
    upoly::trim(edge);
    if (upoly::degree(upoly::gcd(edge, upoly::derivative(edge))) > 0) degenerate = true;
  }

  LctResult r;
  r.method = LctMethod::Newton;
  r.witness.kind = "newton";
  r.witness.t0 = t0;
  r.value = t0 <= 1 ? Rational(1) : Rational(1 / t0);
  r.degenerate = degenerate;
  r.exact = !degenerate;
  return r;
}

namespace {

struct AxisData {
  int v = 0;
  int k = 0;
};

struct Component {
  Poly2 g;
  int e;
};

constexpr int kMaxDepth = 64;

class Resolver {
 public:
  LctResult best;
  bool have = false;

  void candidate(const Rational& value, const Witness& w) {
    if (!have || value < best.value) {
      best.value = value;
      best.witness = w;
      have = true;
    }
  }

  void visit(std::vector<Component> comps, AxisData ax, AxisData ay, int depth) {
    std::erase_if(comps, [](const Component& c) { return c.g.constant_term() != 0; });
    int r = 0, m = 0;
    for (const auto& c : comps) {
      const int o = c.g.order();
      r += o;
      m += c.e * o;
    }
    if (is_good(comps, r, ax, ay)) return;
    if (depth >= kMaxDepth) fail(ErrorCode::NonTermination, "resolution exceeded depth " + std::to_string(kMaxDepth));

    const AxisData E{ax.v + ay.v + m, ax.k + ay.k + 1};
    candidate(ratio(E.k + 1, E.v), Witness{"exceptional", E.v, E.k, 0});

    // Chart (x, xy): E = {x = 0}, the old w-axis stays {y = 0}.
    std::vector<Component> c1;
    UPoly T{1};
    bool infinity_point = false;
    for (const auto& c : comps) {
      const int o = c.g.order();
      Poly2 s = c.g.compose(Poly2::z(), Poly2::z() * Poly2::w()).divide_monomial(o, 0);
      const UPoly t = s.restrict_z0();
      if (upoly::degree(t) < o) infinity_point = true;
      T = upoly::mul(T, t);
      c1.push_back({std::move(s), c.e});
    }
    const auto split = upoly::split_roots(T);
    for (size_t i = 1; i < split.irrational.size(); ++i)
      if (upoly::degree(split.irrational[i]) > 0)
        fail(ErrorCode::IrrationalCenter, "strict transform is singular or tangent at an irrational point of the exceptional line");
    for (const auto& root : split.rational) {
      std::vector<Component> shifted;
      for (const auto& c : c1) shifted.push_back({c.g.shift_w(root.value), c.e});
      visit(std::move(shifted), E, root.value == 0 ? ay : AxisData{}, depth + 1);
    }

    // Chart (xy, y): only its origin lies outside the first chart.
    if (infinity_point) {
      std::vector<Component> c2;
      for (const auto& c : comps) {
        const int o = c.g.order();
        c2.push_back({c.g.compose(Poly2::z() * Poly2::w(), Poly2::w()).divide_monomial(0, o), c.e});
      }
      visit(std::move(c2), ax, E, depth + 1);
    }
  }

 private:
  static bool is_good(const std::vector<Component>& comps, int r, AxisData ax, AxisData ay) {
    if (r == 0) return true;
    if (r > 1) return false;
    const Poly2& g = comps.front().g;
    const int divisors = (ax.v > 0) + (ay.v > 0);
    if (divisors == 0) return true;
    if (divisors == 2) return false;
    // Smooth branch against one divisor axis: transversal when its restriction has a simple zero.
    const UPoly t = ax.v > 0 ? g.restrict_z0() : g.restrict_w0();
    return !t.empty() && t.size() >= 2 && t[0] == 0 && t[1] != 0;
  }
};

}  // namespace

LctResult lct_resolution(const CurveGerm& g) {
  Resolver res;
  res.best.method = LctMethod::Resolution;
  AxisData ax{g.weight_z(), 0}, ay{g.weight_w(), 0};
  std::vector<Component> comps;
  bool z_in_poly = false, w_in_poly = false;
  if (!g.poly.is_constant()) {
    for (auto& f : poly2::squarefree(g.poly)) {
      if (f.poly == Poly2::z()) {
        ax.v += f.multiplicity;
        z_in_poly = true;
      } else if (f.poly == Poly2::w()) {
        ay.v += f.multiplicity;
        w_in_poly = true;
      } else if (f.poly.constant_term() == 0) { comps.push_back({f.poly, f.multiplicity});
      }
    }
  } else if (g.poly.is_zero()) {
    fail(ErrorCode::InvalidArgument, "zero germ");
  }
  if (ax.v > 0) res.candidate(ratio(1, ax.v), Witness{z_in_poly ? "component" : "axis", ax.v, 0, 0});
  if (ay.v > 0) res.candidate(ratio(1, ay.v), Witness{w_in_poly ? "component" : "axis", ay.v, 0, 0});
  for (const auto& c : comps) res.candidate(ratio(1, c.e), Witness{"component", c.e, 0, 0});
  if (!res.have) return unit_result(LctMethod::Resolution);
  res.visit(comps, ax, ay, 0);
  res.best.method = LctMethod::Resolution;
  return res.best;
}

LctResult lct_auto(const CurveGerm& g) {
  if (g.full().constant_term() != 0) return unit_result(LctMethod::Pattern);
  LctResult n = lct_newton(g);
  if (!n.degenerate) return n;
  try {
    return lct_resolution(g);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::IrrationalCenter) throw;
  }
  const auto br = lct_numeric_oracle(g);
  LctResult r;
  r.method = LctMethod::OracleBracket;
  r.exact = false;
  r.witness = n.witness;
  r.value = n.value;  // Newton upper bound
  r.bracket = std::make_pair(br.first, std::min(br.second, n.value.get_d()));
  return r;
}

LctResult lct_with(const CurveGerm& g, LctMethod m) {
  switch (m) {
    case LctMethod::Pattern: return lct_auto(g);
    case LctMethod::Newton: return lct_newton(g);
    case LctMethod::Resolution: return lct_resolution(g);
    case LctMethod::OracleBracket: {
      const auto br = lct_numeric_oracle(g);
      LctResult r;
      r.method = LctMethod::OracleBracket;
      r.exact = false;
      r.witness.kind = "oracle";
      r.bracket = br;
      r.value = ratio(std::lround(br.first * 1000.0), 1000);  // lower end of the bracket
      return r;
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown method");
}

LctResult lct_power(const CurveGerm& g, int m) {
  if (m < 1) fail(ErrorCode::InvalidArgument, "power must be at least 1");
  LctResult r = lct_auto(g);
  if (m == 1 || r.infinite) return r;
  r.value /= m;
  r.witness.v *= m;
  r.witness.t0 *= m;
  if (r.bracket) r.bracket = std::make_pair(r.bracket->first / m, r.bracket->second / m);
  return r;
}

LctResult holder_combine(const LctResult& f, const LctResult& g) {
  if (!f.exact || !g.exact) fail(ErrorCode::InvalidArgument, "Holder bound needs exact inputs");
  if (f.infinite) return g;
  if (g.infinite) return f;
  LctResult r;
  r.value = f.value * g.value / (f.value + g.value);
  r.method = LctMethod::Pattern;
  r.exact = false;
  r.witness.kind = "holder lower bound";
  return r;
}

CurveGerm blowup_pullback(const CurveGerm& g, int m, bool second_chart) {
  if (m < 1) fail(ErrorCode::InvalidArgument, "exceptional order must be at least 1");
  const int mult = multiplicity(g);
  if (mult < m)
    fail(ErrorCode::InsufficientMultiplicity,
         "germ has multiplicity " + std::to_string(mult) + " < " + std::to_string(m));
  const int a = g.weight_z(), b = g.weight_w();
  CurveGerm out;
  if (!second_chart) {
    out.poly = g.poly.compose(Poly2::z(), Poly2::z() * Poly2::w()).divide_monomial(m, 0);
    out.weights = {{Axis::Z, a + b + m - 1}, {Axis::W, b}};
  } else {
    out.poly = g.poly.compose(Poly2::z() * Poly2::w(), Poly2::w()).divide_monomial(0, m);
    out.weights = {{Axis::Z, a}, {Axis::W, a + b + m - 1}};
  }
  std::erase_if(out.weights, [](const AxisWeight& w) { return w.multiplicity == 0; });
  return out;
}

DelPezzoFloor delpezzo_floor(int c1sq, int nu) {
  if (nu < 1) fail(ErrorCode::InvalidArgument, "nu must be at least 1");
  if (c1sq == 1)
    return {ratio(5, 6), ratio(5, 6), false, "local alpha lemma, degree 1: alpha_{nu,1} >= 5/6"};
  if (c1sq == 3)
    return {ratio(2, 3), ratio(2, 3), true,
            "local alpha lemma, cubic surface: alpha_{nu,1} >= 2/3, alpha_{nu,2} > 2/3"};
  fail(ErrorCode::UnsupportedSurface, "no certified floor for c1^2 = " + std::to_string(c1sq));
}

CurveGerm linear_change(const CurveGerm& g, const Rational& a, const Rational& b, const Rational& c,
                        const Rational& d) {
  if (a * d - b * c == 0) fail(ErrorCode::InvalidArgument, "singular linear change");
  const Poly2 zi = Poly2::z().scaled(a) + Poly2::w().scaled(b);
  const Poly2 wi = Poly2::z().scaled(c) + Poly2::w().scaled(d);
  CurveGerm out;
  out.poly = g.full().compose(zi, wi);
  return out;
}

}  // namespace krf
