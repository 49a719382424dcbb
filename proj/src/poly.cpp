#include "krf/poly.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <complex>
#include <sstream>

#include "krf/errors.hpp"
#include "krf/roots.hpp"

namespace krf {

namespace upoly {

void trim(UPoly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

int degree(const UPoly& p) { return static_cast<int>(p.size()) - 1; }

bool is_zero(const UPoly& p) { return p.empty(); }

UPoly add(const UPoly& a, const UPoly& b) {
  UPoly r(std::max(a.size(), b.size()));
  for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (size_t i = 0; i < b.size(); ++i) r[i] += b[i];
  trim(r);
  return r;
}

UPoly sub(const UPoly& a, const UPoly& b) {
  UPoly r(std::max(a.size(), b.size()));
  for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
  trim(r);
  return r;
}

UPoly mul(const UPoly& a, const UPoly& b) {
  if (a.empty() || b.empty()) return {};
  UPoly r(a.size() + b.size() - 1);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  trim(r);
  return r;
}

UPoly scale(const UPoly& a, const Rational& c) {
  if (c == 0) return {};
  UPoly r(a);
  for (auto& x : r) x *= c;
  return r;
}

UPoly derivative(const UPoly& p) {
  if (p.size() <= 1) return {};
  UPoly r(p.size() - 1);
  for (size_t k = 1; k < p.size(); ++k) r[k - 1] = p[k] * static_cast<long>(k);
  trim(r);
  return r;
}

Rational eval(const UPoly& p, const Rational& x) {
  Rational acc = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::pair<UPoly, UPoly> divmod(const UPoly& a, const UPoly& b) {
  if (b.empty()) fail(ErrorCode::InvalidArgument, "division by the zero polynomial");
  UPoly r(a);
  trim(r);
  const int db = degree(b);
  if (degree(r) < db) return {{}, r};
  UPoly q(degree(r) - db + 1);
  while (!r.empty() && degree(r) >= db) {
    const int shift = degree(r) - db;
    const Rational c = r.back() / b.back();
    q[shift] = c;
    for (int k = 0; k <= db; ++k) r[shift + k] -= c * b[k];
    trim(r);
  }
  trim(q);
  return {q, r};
}

UPoly exact_div(const UPoly& a, const UPoly& b) {
  auto [q, r] = divmod(a, b);
  if (!r.empty()) fail(ErrorCode::InvalidArgument, "inexact univariate division");
  return q;
}

UPoly monic(const UPoly& p) {
  if (p.empty()) return p;
  return scale(p, 1 / p.back());
}

UPoly gcd(const UPoly& a, const UPoly& b) {
  UPoly x(a), y(b);
  trim(x);
  trim(y);
  while (!y.empty()) {
    UPoly r = divmod(x, y).second;
    x = std::move(y);
    y = std::move(r);
  }
  return monic(x);
}

std::vector<UPoly> squarefree(const UPoly& p) {
  std::vector<UPoly> out;
  if (degree(p) <= 0) return out;
  const UPoly dp = derivative(p);
  const UPoly a0 = gcd(p, dp);
  UPoly b = exact_div(p, a0);
  UPoly c = exact_div(dp, a0);
  UPoly d = sub(c, derivative(b));
  while (degree(b) > 0) {
    const UPoly a = gcd(b, d);
    out.push_back(a);
    b = exact_div(b, a);
    c = exact_div(d, a);
    d = sub(c, derivative(b));
  }
  while (!out.empty() && degree(out.back()) == 0) out.pop_back();
  return out;
}

namespace {

// Integer-coefficient multiple of p with the same roots.
std::vector<mpz_class> integer_form(const UPoly& p) {
  mpz_class l = 1;
  for (const auto& c : p) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
  std::vector<mpz_class> out;
  for (const auto& c : p) out.push_back(mpz_class(c * l));
  return out;
}

// Rational roots of a squarefree polynomial: numeric seeds refined at high precision, then snapped to
// the lattice (1/lc) Z that contains every rational root, then checked exactly.
std::vector<Rational> squarefree_rational_roots(const UPoly& p) {
  std::vector<Rational> roots;
  const int n = degree(p);
  if (n <= 0) return roots;
  const auto ip = integer_form(p);
  const mpz_class& lead = ip.back();
  std::vector<std::complex<double>> cd;
  double big = 0.0;
  for (const auto& c : ip) big = std::max(big, std::abs(mpz_class(c).get_d()));
  for (const auto& c : ip) cd.emplace_back(c.get_d() / big, 0.0);
  const auto approx = polynomial_roots(cd);
  const mp_bitcnt_t prec = 512;
  for (const auto& z : approx) {
    if (std::abs(z.imag()) > 1e-6 * std::max(1.0, std::abs(z.real()))) continue;
    mpf_class x(z.real(), prec);
    for (int it = 0; it < 200; ++it) {
      mpf_class f(0, prec), df(0, prec);
      for (int k = n; k >= 0; --k) {
        df = df * x + f;
        f = f * x + mpf_class(ip[k], prec);
      }
      if (df == 0) break;
      mpf_class step(0, prec);
      step = f / df;
      x -= step;
      if (abs(step) <= abs(x) * mpf_class(1e-120, prec) || step == 0) break;
    }
    mpf_class scaled(0, prec), rounded(0, prec);
    scaled = x * mpf_class(lead, prec);
    rounded = floor(scaled + mpf_class(0.5, prec));
    const mpz_class num(rounded);
    Rational cand(num, lead);
    cand.canonicalize();
    if (eval(p, cand) != 0) continue;
    if (std::find(roots.begin(), roots.end(), cand) == roots.end()) roots.push_back(cand);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace

RootSplit split_roots(const UPoly& p) {
  RootSplit out;
  const auto sf = squarefree(p);
  out.irrational.resize(sf.size());
  for (size_t i = 0; i < sf.size(); ++i) {
    UPoly rest = sf[i];
    for (const auto& r : squarefree_rational_roots(sf[i])) {
      out.rational.push_back({r, static_cast<int>(i) + 1});
      rest = exact_div(rest, UPoly{-r, 1});
    }
    out.irrational[i] = monic(rest);
  }
  std::sort(out.rational.begin(), out.rational.end(),
            [](const RationalRoot& a, const RationalRoot& b) { return a.value < b.value; });
  return out;
}

}  // namespace upoly

Poly2 Poly2::constant(const Rational& c) {
  Poly2 p;
  p.add_term(c, 0, 0);
  return p;
}

Poly2 Poly2::monomial(const Rational& c, int i, int j) {
  Poly2 p;
  p.add_term(c, i, j);
  return p;
}

bool Poly2::is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == Key{0, 0}); }

Rational Poly2::coeff(int i, int j) const {
  auto it = terms_.find({i, j});
  return it == terms_.end() ? Rational(0) : it->second;
}

void Poly2::add_term(const Rational& c, int i, int j) {
  if (c == 0) return;
  auto& slot = terms_[{i, j}];
  slot += c;
  if (slot == 0) terms_.erase({i, j});
}

int Poly2::total_degree() const {
  int d = -1;
  for (const auto& [k, c] : terms_) d = std::max(d, k.first + k.second);
  return d;
}

int Poly2::order() const {
  if (terms_.empty()) return -1;
  int d = 1 << 30;
  for (const auto& [k, c] : terms_) d = std::min(d, k.first + k.second);
  return d;
}

int Poly2::degree_z() const {
  int d = -1;
  for (const auto& [k, c] : terms_) d = std::max(d, k.first);
  return d;
}

int Poly2::degree_w() const {
  int d = -1;
  for (const auto& [k, c] : terms_) d = std::max(d, k.second);
  return d;
}

Poly2 Poly2::initial_form() const {
  Poly2 out;
  const int m = order();
  for (const auto& [k, c] : terms_)
    if (k.first + k.second == m) out.terms_.emplace(k, c);
  return out;
}

Poly2 Poly2::operator+(const Poly2& o) const {
  Poly2 r(*this);
  for (const auto& [k, c] : o.terms_) r.add_term(c, k.first, k.second);
  return r;
}

Poly2 Poly2::operator-(const Poly2& o) const {
  Poly2 r(*this);
  for (const auto& [k, c] : o.terms_) r.add_term(-c, k.first, k.second);
  return r;
}

Poly2 Poly2::operator-() const { return scaled(-1); }

Poly2 Poly2::operator*(const Poly2& o) const {
  Poly2 r;
  for (const auto& [a, ca] : terms_)
    for (const auto& [b, cb] : o.terms_) r.add_term(ca * cb, a.first + b.first, a.second + b.second);
  return r;
}

Poly2 Poly2::scaled(const Rational& c) const {
  Poly2 r;
  if (c == 0) return r;
  for (const auto& [k, v] : terms_) r.terms_.emplace(k, v * c);
  return r;
}

Poly2 Poly2::pow(int m) const {
  if (m < 0) fail(ErrorCode::InvalidArgument, "negative power");
  Poly2 r = constant(1), b = *this;
  while (m > 0) {
    if (m & 1) r = r * b;
    b = b * b;
    m >>= 1;
  }
  return r;
}

Poly2 Poly2::dz() const {
  Poly2 r;
  for (const auto& [k, c] : terms_)
    if (k.first > 0) r.add_term(c * k.first, k.first - 1, k.second);
  return r;
}

Poly2 Poly2::dw() const {
  Poly2 r;
  for (const auto& [k, c] : terms_)
    if (k.second > 0) r.add_term(c * k.second, k.first, k.second - 1);
  return r;
}

Poly2 Poly2::compose(const Poly2& z_image, const Poly2& w_image) const {
  std::vector<Poly2> zp{constant(1)}, wp{constant(1)};
  for (int i = 1; i <= degree_z(); ++i) zp.push_back(zp.back() * z_image);
  for (int j = 1; j <= degree_w(); ++j) wp.push_back(wp.back() * w_image);
  Poly2 r;
  for (const auto& [k, c] : terms_) r = r + (zp[k.first] * wp[k.second]).scaled(c);
  return r;
}

Poly2 Poly2::shift_w(const Rational& a) const {
  if (a == 0) return *this;
  return compose(z(), w() + constant(a));
}

Rational Poly2::eval(const Rational& zv, const Rational& wv) const {
  Rational acc = 0;
  for (const auto& [k, c] : terms_) {
    Rational t = c;
    for (int i = 0; i < k.first; ++i) t *= zv;
    for (int j = 0; j < k.second; ++j) t *= wv;
    acc += t;
  }
  return acc;
}

Poly2 Poly2::divide_exact(const Poly2& d) const {
  if (d.is_zero()) fail(ErrorCode::InvalidArgument, "division by the zero polynomial");
  Poly2 r(*this), q;
  const auto [ld, cd] = *d.terms_.rbegin();
  while (!r.is_zero()) {
    const auto [lr, cr] = *r.terms_.rbegin();
    const int a = lr.first - ld.first, b = lr.second - ld.second;
    if (a < 0 || b < 0) fail(ErrorCode::InvalidArgument, "inexact bivariate division");
    const Rational c = cr / cd;
    q.add_term(c, a, b);
    r = r - d * monomial(c, a, b);
  }
  return q;
}

Poly2 Poly2::divide_monomial(int a, int b) const {
  Poly2 r;
  for (const auto& [k, c] : terms_) {
    if (k.first < a || k.second < b) fail(ErrorCode::InvalidArgument, "monomial does not divide");
    r.terms_.emplace(Key{k.first - a, k.second - b}, c);
  }
  return r;
}

Poly2 Poly2::normalized() const {
  if (is_zero()) return *this;
  return scaled(1 / terms_.rbegin()->second);
}

UPoly Poly2::restrict_z0() const {
  UPoly p(std::max(degree_w() + 1, 0));
  for (const auto& [k, c] : terms_)
    if (k.first == 0) p[k.second] += c;
  upoly::trim(p);
  return p;
}

UPoly Poly2::restrict_w0() const {
  UPoly p(std::max(degree_z() + 1, 0));
  for (const auto& [k, c] : terms_)
    if (k.second == 0) p[k.first] += c;
  upoly::trim(p);
  return p;
}

std::string Poly2::to_string(const std::string& zname, const std::string& wname) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  // Highest total degree first, then by z exponent.
  std::vector<std::pair<Key, Rational>> v(terms_.begin(), terms_.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    const int da = a.first.first + a.first.second, db = b.first.first + b.first.second;
    if (da != db) return da > db;
    return a.first.first > b.first.first;
  });
  for (const auto& [k, c] : v) {
    Rational mag = abs(c);
    const bool neg = c < 0;
    if (first) os << (neg ? "-" : "");
    else os << (neg ? " - " : " + ");
    first = false;
    const bool unit = k.first == 0 && k.second == 0;
    bool need_star = false;
    if (mag != 1 || unit) {
      os << mag.get_str();
      need_star = true;
    }
    auto var = [&](const std::string& name, int e) {
      if (e == 0) return;
      if (need_star) os << "*";
      os << name;
      if (e > 1) os << "^" << e;
      need_star = true;
    };
    var(zname, k.first);
    var(wname, k.second);
  }
  return os.str();
}

namespace poly2 {

namespace {

// Q[z][w] view: entry j is the coefficient of w^j as a polynomial in z.
using Rep = std::vector<UPoly>;

Rep to_rep(const Poly2& p) {
  Rep r(std::max(p.degree_w() + 1, 0));
  for (const auto& [k, c] : p.terms()) {
    if (r[k.second].size() <= static_cast<size_t>(k.first)) r[k.second].resize(k.first + 1);
    r[k.second][k.first] += c;
  }
  for (auto& u : r) upoly::trim(u);
  return r;
}

Poly2 from_rep(const Rep& r) {
  Poly2 p;
  for (size_t j = 0; j < r.size(); ++j)
    for (size_t i = 0; i < r[j].size(); ++i) p.add_term(r[j][i], static_cast<int>(i), static_cast<int>(j));
  return p;
}

void trim_rep(Rep& r) {
  while (!r.empty() && r.back().empty()) r.pop_back();
}

UPoly content(const Rep& r) {
  UPoly g;
  for (const auto& c : r)
    if (!c.empty()) g = upoly::gcd(g, c);
  return g;
}

Rep divide_content(const Rep& r, const UPoly& c) {
  Rep out;
  for (const auto& x : r) out.push_back(x.empty() ? UPoly{} : upoly::exact_div(x, c));
  return out;
}

Rep primitive(const Rep& r) {
  if (r.empty()) return r;
  return divide_content(r, content(r));
}

Rep pseudo_remainder(Rep a, const Rep& b) {
  const int db = static_cast<int>(b.size()) - 1;
  const UPoly& lb = b.back();
  trim_rep(a);
  while (!a.empty() && static_cast<int>(a.size()) - 1 >= db) {
    const int shift = static_cast<int>(a.size()) - 1 - db;
    const UPoly la = a.back();
    for (auto& x : a) x = upoly::mul(x, lb);
    for (int k = 0; k <= db; ++k) a[shift + k] = upoly::sub(a[shift + k], upoly::mul(la, b[k]));
    trim_rep(a);
  }
  return a;
}

}  // namespace

Poly2 gcd(const Poly2& a, const Poly2& b) {
  if (a.is_zero()) return b.normalized();
  if (b.is_zero()) return a.normalized();
  Rep ra = to_rep(a), rb = to_rep(b);
  const UPoly gc = upoly::gcd(content(ra), content(rb));
  ra = primitive(ra);
  rb = primitive(rb);
  if (ra.size() < rb.size()) std::swap(ra, rb);
  while (!rb.empty()) {
    Rep r = pseudo_remainder(ra, rb);
    ra = std::move(rb);
    rb = r.empty() ? Rep{} : primitive(r);
  }
  Rep g = ra.size() == 1 ? Rep{UPoly{1}} : ra;
  for (auto& x : g) x = upoly::mul(x, gc);
  return from_rep(g).normalized();
}

std::vector<Factor> squarefree(const Poly2& f) {
  std::vector<Factor> out;
  if (f.is_constant()) return out;
  const Rep r = to_rep(f);
  const UPoly c = content(r);
  const auto zf = upoly::squarefree(c);
  for (size_t i = 0; i < zf.size(); ++i) {
    if (upoly::degree(zf[i]) <= 0) continue;
    Poly2 g;
    for (size_t k = 0; k < zf[i].size(); ++k) g.add_term(zf[i][k], static_cast<int>(k), 0);
    out.push_back({g.normalized(), static_cast<int>(i) + 1});
  }
  const Poly2 P = from_rep(divide_content(r, c));
  if (P.degree_w() <= 0) return out;
  const Poly2 dP = P.dw();
  const Poly2 a0 = gcd(P, dP);
  Poly2 b = P.divide_exact(a0);
  Poly2 cc = dP.divide_exact(a0);
  Poly2 d = cc - b.dw();
  int i = 1;
  while (!b.is_constant()) {
    const Poly2 a = gcd(b, d);
    if (!a.is_constant()) out.push_back({a.normalized(), i});
    b = b.divide_exact(a);
    cc = d.divide_exact(a);
    d = cc - b.dw();
    ++i;
  }
  return out;
}

}  // namespace poly2

}  // namespace krf
