#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>

#include <gmpxx.h>

#include "krf/errors.hpp"
#include "krf/lct.hpp"
#include "krf/roots.hpp"

namespace krf {

namespace {

using cd = std::complex<double>;

constexpr double kMaxRootError = 1e-3;
constexpr size_t kMinRadii = 6;
constexpr double kWindowDrift = 0.25;

constexpr std::array<double, 5> kGLx{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                     0.9061798459386640};
constexpr std::array<double, 5> kGLw{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                     0.4786286704993665, 0.2369268850561891};
constexpr std::array<double, 8> kG8x{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                     -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                     0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kG8w{0.1012285362903763, 0.2223810344533745, 0.3137066671554602,
                                     0.3626837833783620, 0.3626837833783620, 0.3137066671554602,
                                     0.2223810344533745, 0.1012285362903763};

constexpr mp_bitcnt_t kPrec = 256;

// Component of the germ in the generic coordinates (u, v): coeff[j][k] multiplies u^j v^k.
struct NumComponent {
  std::vector<std::vector<mpf_class>> coeff;
  bool v_divides = false;  // the component contains v = 0; coeff then holds the cofactor
  int e = 1;
};

struct MpC {
  mpf_class re{0, kPrec}, im{0, kPrec};
};

MpC mpc(double re, double im) {
  MpC r;
  r.re = re;
  r.im = im;
  return r;
}
MpC operator+(const MpC& a, const MpC& b) {
  MpC r;
  r.re = a.re + b.re;
  r.im = a.im + b.im;
  return r;
}
MpC operator-(const MpC& a, const MpC& b) {
  MpC r;
  r.re = a.re - b.re;
  r.im = a.im - b.im;
  return r;
}
MpC operator*(const MpC& a, const MpC& b) {
  MpC r;
  r.re = a.re * b.re - a.im * b.im;
  r.im = a.re * b.im + a.im * b.re;
  return r;
}
MpC operator/(const MpC& a, const MpC& b) {
  mpf_class d(0, kPrec);
  d = b.re * b.re + b.im * b.im;
  MpC r;
  r.re = (a.re * b.re + a.im * b.im) / d;
  r.im = (a.im * b.re - a.re * b.im) / d;
  return r;
}
double mp_abs(const MpC& a) {
  mpf_class m(0, kPrec);
  m = sqrt(a.re * a.re + a.im * a.im);
  return m.get_d();
}
cd to_cd(const MpC& a) { return {a.re.get_d(), a.im.get_d()}; }

// Aberth-Ehrlich in kPrec bits from double seeds; p has nonzero constant and leading terms.
std::vector<MpC> polish_roots(const std::vector<MpC>& p, const std::vector<cd>& seeds) {
  const size_t n = seeds.size();
  std::vector<MpC> z;
  for (size_t i = 0; i < n; ++i) {
    // Split seeds that collapsed to the same double.
    const cd s = seeds[i] * (1.0 + 1e-9 * std::polar(1.0, 2.3 * static_cast<double>(i + 1)));
    z.push_back(mpc(s.real(), s.imag()));
  }
  const mpf_class tol(std::ldexp(1.0, -static_cast<int>(kPrec) / 2), kPrec);
  for (int it = 0; it < 400; ++it) {
    bool done = true;
    for (size_t i = 0; i < n; ++i) {
      MpC f = p.back(), df;
      for (size_t k = p.size() - 1; k-- > 0;) {
        df = df * z[i] + f;
        f = f * z[i] + p[k];
      }
      if (f.re == 0 && f.im == 0) continue;
      MpC s;
      for (size_t j = 0; j < n; ++j)
        if (j != i) s = s + mpc(1.0, 0.0) / (z[i] - z[j]);
      const MpC nw = f / df;
      const MpC step = nw / (mpc(1.0, 0.0) - nw * s);
      z[i] = z[i] - step;
      mpf_class st(0, kPrec), zz(0, kPrec);
      st = step.re * step.re + step.im * step.im;
      zz = z[i].re * z[i].re + z[i].im * z[i].im;
      if (st > tol * tol * zz) done = false;
    }
    if (done) return z;
  }
  fail(ErrorCode::SolverFailure, "fiber root refinement did not converge");
}

struct Root {
  cd at;
  int e;
};

// log of int over [0,a]x[0,b] of (x^2 + y^2)^(-beta), for beta < 1.
double log_corner_integral(double a, double b, double beta) {
  if (a <= 0.0 || b <= 0.0) return -std::numeric_limits<double>::infinity();
  const double p = 2.0 - 2.0 * beta;
  auto wedge = [&](double side, double theta_max) {
    double acc = 0.0;
    for (size_t k = 0; k < kG8x.size(); ++k) {
      const double th = 0.5 * theta_max * (kG8x[k] + 1.0);
      acc += kG8w[k] * std::pow(side / std::cos(th), p);
    }
    return 0.5 * theta_max * acc / p;
  };
  return std::log(wedge(a, std::atan2(b, a)) + wedge(b, std::atan2(a, b)));
}

// Quadrature of a single fiber, stored so any exponent can be evaluated afterwards.
struct FiberRule {
  std::vector<double> log_weight;  // regular nodes: log of quadrature weight
  std::vector<double> log_f;       // log|f| at the node
  struct Singular {
    double x0, x1, y0, y1;  // cell offsets relative to the root
    double log_rest;        // log|f / (v - root)^e| at the root
    int e;
  };
  std::vector<Singular> singular;

  // log of the fiber integral of |f|^(-2 alpha).
  double log_integral(double alpha) const {
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    terms.reserve(log_f.size() + singular.size() * 4);
    for (size_t i = 0; i < log_f.size(); ++i) terms.push_back(log_weight[i] - 2.0 * alpha * log_f[i]);
    for (const auto& s : singular) {
      const double beta = alpha * s.e;
      const double base = -2.0 * alpha * s.log_rest;
      const double xs[2] = {-s.x0, s.x1}, ys[2] = {-s.y0, s.y1};
      for (double a : xs)
        for (double b : ys) terms.push_back(base + log_corner_integral(a, b, beta));
    }
    for (double t : terms) m = std::max(m, t);
    if (!std::isfinite(m)) return m;
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - m);
    return m + std::log(acc);
  }
};

class FiberBuilder {
 public:
  FiberBuilder(std::vector<Root> roots, double log_lead) : roots_(std::move(roots)), log_lead_(log_lead) {}

  FiberRule build(double rho) {
    rule_ = {};
    cell(cd(0.0, 0.0), rho, 0);
    return std::move(rule_);
  }

 private:
  std::vector<Root> roots_;
  double log_lead_;
  FiberRule rule_;

  double log_f(cd v, int skip = -1) const {
    double acc = log_lead_;
    for (size_t j = 0; j < roots_.size(); ++j)
      if (static_cast<int>(j) != skip) acc += roots_[j].e * std::log(std::abs(v - roots_[j].at));
    return acc;
  }

  void cell(cd c, double h, int depth) {
    if (depth > 400) fail(ErrorCode::QuadratureFailure, "fiber quadtree too deep");
    double nearest = std::numeric_limits<double>::infinity();
    std::vector<int> inside;
    for (size_t j = 0; j < roots_.size(); ++j) {
      const cd d = roots_[j].at - c;
      nearest = std::min(nearest, std::abs(d));
      if (std::abs(d.real()) <= h && std::abs(d.imag()) <= h) inside.push_back(static_cast<int>(j));
    }
    if (nearest >= 3.0 * h) {
      for (size_t a = 0; a < kGLx.size(); ++a)
        for (size_t b = 0; b < kGLx.size(); ++b) {
          const cd v = c + cd(h * kGLx[a], h * kGLx[b]);
          rule_.log_weight.push_back(std::log(kGLw[a] * kGLw[b] * h * h));
          rule_.log_f.push_back(log_f(v));
        }
      return;
    }
    if (inside.size() == 1) {
      const int j = inside[0];
      const cd r = roots_[j].at;
      double other = std::numeric_limits<double>::infinity();
      for (size_t k = 0; k < roots_.size(); ++k)
        if (static_cast<int>(k) != j) other = std::min(other, std::abs(roots_[k].at - r));
      if (other >= 256.0 * h) {
        const cd d = c - r;
        rule_.singular.push_back({d.real() - h, d.real() + h, d.imag() - h, d.imag() + h, log_f(r, j), roots_[j].e});
        return;
      }
    }
    const double q = 0.5 * h;
    cell(c + cd(-q, -q), q, depth + 1);
    cell(c + cd(q, -q), q, depth + 1);
    cell(c + cd(-q, q), q, depth + 1);
    cell(c + cd(q, q), q, depth + 1);
  }
};

// Exact data for a generic coordinate change z = u + a v, w = v.
std::vector<NumComponent> generic_components(const CurveGerm& g, int& max_e) {
  std::vector<poly2::Factor> comps;
  for (auto& f : poly2::squarefree(g.full()))
    if (f.poly.constant_term() == 0) comps.push_back(f);
  static const Rational shears[] = {Rational(3, 7), Rational(-5, 11), Rational(2, 9), Rational(7, 13),
                                    Rational(-4, 17), Rational(11, 19)};
  for (const auto& a : shears) {
    const Poly2 zi = Poly2::z() + Poly2::w().scaled(a), wi = Poly2::w();
    std::vector<Poly2> moved;
    bool ok = true;
    for (const auto& c : comps) {
      const Poly2 p = c.poly.compose(zi, wi);
      const int o = p.order(), d = p.total_degree();
      // Generic when v^o and v^d both survive: roots stay bounded and exactly o of them tend to 0.
      if (p.coeff(0, o) == 0 || p.coeff(0, d) == 0) ok = false;
      moved.push_back(p);
    }
    if (!ok) continue;
    std::vector<NumComponent> out;
    max_e = 0;
    for (size_t i = 0; i < comps.size(); ++i) {
      NumComponent nc;
      nc.e = comps[i].multiplicity;
      max_e = std::max(max_e, nc.e);
      Poly2 q = moved[i];
      if (upoly::is_zero(q.restrict_w0())) {
        nc.v_divides = true;
        q = q.divide_monomial(0, 1);
      }
      nc.coeff.assign(q.degree_z() + 1, std::vector<mpf_class>(q.degree_w() + 1, mpf_class(0, kPrec)));
      for (const auto& [k, c] : q.terms()) nc.coeff[k.first][k.second] = mpf_class(c, kPrec);
      out.push_back(std::move(nc));
    }
    return out;
  }
  fail(ErrorCode::InconclusiveBracket, "no generic coordinate change found");
}

struct Fibers {
  std::vector<double> log_r;
  std::vector<double> root_error;  // worst root error relative to the distance to the nearest other root
  std::vector<std::vector<FiberRule>> rules;  // [radius][angle]
};

Fibers build_fibers(const std::vector<NumComponent>& comps, const OracleOptions& opt) {
  // Remote roots of the special fiber bound the w-box.
  double rho = 0.5;
  for (const auto& c : comps) {
    std::vector<cd> v0;
    for (const auto& x : c.coeff[0]) v0.emplace_back(x.get_d(), 0.0);
    if (v0.size() < 2) continue;
    for (const auto& r : polynomial_roots(v0))
      if (std::abs(r) > 0.0) rho = std::min(rho, 0.25 * std::abs(r));
  }
  const double round_off = 4.0 * std::numeric_limits<double>::epsilon();
  const double mp_eps = std::ldexp(1.0, -(static_cast<int>(kPrec) - 8));
  Fibers fb;
  for (int k = 0; k < opt.radii; ++k) {
    const double r = std::pow(10.0, -(3.0 + k));
    fb.log_r.push_back(std::log(r));
    std::vector<FiberRule> ring;
    double worst = 0.0;
    for (int l = 0; l < opt.angles; ++l) {
      const cd ud = std::polar(r, 2.0 * M_PI * (l + 0.5) / opt.angles);
      const MpC u = mpc(ud.real(), ud.imag());
      std::vector<MpC> all;
      std::vector<int> mult;
      std::vector<double> err;  // absolute error of each root
      double log_lead = 0.0;
      for (const auto& c : comps) {
        const size_t dv = c.coeff[0].size() - 1;
        std::vector<MpC> cv(dv + 1);
        for (size_t kk = 0; kk <= dv; ++kk) {
          MpC acc;
          for (size_t j = c.coeff.size(); j-- > 0;) {
            acc = acc * u;
            if (kk < c.coeff[j].size()) acc.re = acc.re + c.coeff[j][kk];
          }
          cv[kk] = acc;
        }
        log_lead += c.e * std::log(mp_abs(cv.back()));
        std::vector<cd> cvd;
        for (const auto& x : cv) cvd.push_back(to_cd(x));
        std::vector<MpC> zs;
        if (dv > 0) zs = polish_roots(cv, polynomial_roots(cvd));
        // First-order forward error: working precision rounding in p(z) over |p'(z)|.
        for (size_t j = 0; j < zs.size(); ++j) {
          double mag = 0.0, zk = 1.0;
          const double az = mp_abs(zs[j]);
          for (const auto& ck : cv) {
            mag += mp_abs(ck) * zk;
            zk *= az;
          }
          double dp = mp_abs(cv.back());
          for (size_t i = 0; i < zs.size(); ++i)
            if (i != j) dp *= mp_abs(zs[j] - zs[i]);
          err.push_back(mp_eps * mag / dp + round_off * az);
          all.push_back(zs[j]);
          mult.push_back(c.e);
        }
        if (c.v_divides) {
          all.push_back(MpC{});
          mult.push_back(c.e);
          err.push_back(0.0);
        }
      }
      std::vector<Root> roots;
      for (size_t a = 0; a < all.size(); ++a) {
        double nearest = std::numeric_limits<double>::infinity();
        for (size_t b = 0; b < all.size(); ++b)
          if (a != b) nearest = std::min(nearest, mp_abs(all[a] - all[b]));
        if (std::isfinite(nearest)) worst = std::max(worst, err[a] / nearest);
        roots.push_back({to_cd(all[a]), mult[a]});
      }
      ring.push_back(FiberBuilder(std::move(roots), log_lead).build(rho));
    }
    fb.rules.push_back(std::move(ring));
    fb.root_error.push_back(worst);
  }
  return fb;
}

// log(J(r) r^2) per radius, J the angular mean of the fiber integrals.
std::vector<double> log_profile(const Fibers& fb, double alpha) {
  std::vector<double> y(fb.log_r.size());
  for (size_t k = 0; k < y.size(); ++k) {
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> lw;
    for (const auto& rule : fb.rules[k]) lw.push_back(rule.log_integral(alpha));
    for (double t : lw) m = std::max(m, t);
    double acc = 0.0;
    for (double t : lw) acc += std::exp(t - m);
    y[k] = m + std::log(acc / lw.size()) + 2.0 * fb.log_r[k];
  }
  return y;
}

// Least-squares slope against log r over radii [from, to); with_loglog adds a log(-log r) column
// that absorbs logarithmic factors.
double fit_slope(const Fibers& fb, const std::vector<double>& y, size_t from, size_t to, bool with_loglog) {
  const int p = with_loglog ? 3 : 2;
  double A[3][3] = {}, b[3] = {};
  for (size_t k = from; k < to; ++k) {
    const double x[3] = {1.0, fb.log_r[k], std::log(-fb.log_r[k])};
    for (int i = 0; i < p; ++i) {
      b[i] += x[i] * y[k];
      for (int j = 0; j < p; ++j) A[i][j] += x[i] * x[j];
    }
  }
  for (int i = 0; i < p; ++i)
    for (int r = i + 1; r < p; ++r) {
      const double f = A[r][i] / A[i][i];
      for (int j = i; j < p; ++j) A[r][j] -= f * A[i][j];
      b[r] -= f * b[i];
    }
  double s[3] = {};
  for (int i = p - 1; i >= 0; --i) {
    double acc = b[i];
    for (int j = i + 1; j < p; ++j) acc -= A[i][j] * s[j];
    s[i] = acc / A[i][i];
  }
  return s[1];
}

}  // namespace

std::pair<double, double> lct_numeric_oracle(const CurveGerm& g, const OracleOptions& opt) {
  if (g.full().constant_term() != 0) return {1.0, 1.0};
  int max_e = 1;
  const auto comps = generic_components(g, max_e);
  const Fibers fb = build_fibers(comps, opt);
  size_t usable = 0;
  while (usable < fb.root_error.size() && fb.root_error[usable] <= kMaxRootError) ++usable;
  if (usable < kMinRadii)
    fail(ErrorCode::InconclusiveBracket, "fiber roots are not separated in double precision below r = " +
                                             std::to_string(std::exp(fb.log_r[std::min(usable, fb.log_r.size() - 1)])));

  // +1 integrable, -1 divergent, 0 inconclusive.
  auto classify = [&](double alpha) {
    if (alpha * max_e >= 1.0 - 1e-12) return -1;  // the fiber integral already diverges
    const auto y = log_profile(fb, alpha);
    // Deepest kMinRadii usable radii; both halves of the window must tell the same story, a drifting
    // slope means the asymptotic regime has not been reached.
    const size_t from = usable - kMinRadii, half = from + kMinRadii / 2;
    if (std::abs(fit_slope(fb, y, from, half, false) - fit_slope(fb, y, half, usable, false)) > kWindowDrift) return 0;
    const double s = fit_slope(fb, y, from, usable, true);
    if (s > opt.flat_tolerance) return 1;
    if (s < -opt.flat_tolerance) return -1;
    return 0;
  };

  std::vector<std::pair<double, int>> seen;
  auto scan = [&](double from, double to, double step) {
    for (int i = 1;; ++i) {
      const double a = std::round((from + i * step) * 1e6) / 1e6;
      if (a > to + 1e-9) break;
      const int c = classify(a);
      seen.emplace_back(a, c);
      if (c < 0) break;
    }
  };
  double lo = 0.0, hi = 1.0;
  auto bracket = [&] {
    hi = 1.0;
    for (auto [a, c] : seen)
      if (c < 0) hi = std::min(hi, a);
    lo = 0.0;
    for (auto [a, c] : seen) {
      if (c > 0 && a > hi) fail(ErrorCode::InconclusiveBracket, "integrable above a divergent exponent");
      if (c > 0) lo = std::max(lo, a);
    }
  };
  scan(0.0, 1.0, opt.coarse_step);
  bracket();
  scan(lo, hi - 0.5 * opt.fine_step, opt.fine_step);
  bracket();
  if (lo == 0.0) fail(ErrorCode::InconclusiveBracket, "no exponent on the grid was found integrable");
  return {lo, hi};
}

}  // namespace krf
