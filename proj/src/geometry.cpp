#include "krf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "krf/errors.hpp"
#include "krf/format.hpp"

namespace krf {

Grid::Grid(double L_, int N_) : L(L_), N(N_) {
  if (!(L_ > 0.0) || !std::isfinite(L_))
    fail(ErrorCode::InvalidArgument, "grid half-width must be positive, got " + fmt_double(L_));
  if (N_ < kMinSamples)
    fail(ErrorCode::InvalidArgument,
         "grid needs at least " + std::to_string(kMinSamples) + " samples, got " + std::to_string(N_));
}

std::vector<double> Grid::nodes() const {
  std::vector<double> out(N);
  for (int i = 0; i < N; ++i) out[i] = s(i);
  return out;
}

namespace {

// Mass beyond an edge sample fe whose inner neighbour is fn, assuming exponential decay.
double edge_tail(double fe, double fn, double h, bool& decays) {
  if (fe == 0.0) return 0.0;
  if (fe * fn <= 0.0 || std::abs(fe) >= std::abs(fn)) {
    decays = false;
    return 0.0;
  }
  double rate = std::log(fn / fe) / h;
  return fe / rate;
}

}  // namespace

TailedIntegral integrate_with_tails(std::span<const double> f, double h) {
  const size_t n = f.size();
  TailedIntegral out;
  if (n < 3) {
    out.tails_decay = false;
    return out;
  }
  double sum = 0.5 * (f[0] + f[n - 1]);
  for (size_t i = 1; i + 1 < n; ++i) sum += f[i];
  out.tail = edge_tail(f[0], f[1], h, out.tails_decay) + edge_tail(f[n - 1], f[n - 2], h, out.tails_decay);
  out.value = h * sum + out.tail;
  return out;
}

double integrate(std::span<const double> f, double h) { return integrate_with_tails(f, h).value; }

double fs_density(double s) {
  double e = std::exp(-std::abs(s));
  return 2.0 * e / ((1.0 + e) * (1.0 + e));
}

double fs_log_slope(double s) { return -std::tanh(0.5 * s); }

double fs_log_curvature(double s) { return -fs_density(s); }

double MetricProfile::volume() const { return kTwoPi * integrate(w, grid.h()); }

double MetricProfile::min_density() const { return *std::min_element(w.begin(), w.end()); }

std::vector<double> MetricProfile::moment() const {
  const double h = grid.h();
  std::vector<double> out(w.size());
  bool decays = true;
  double acc = w.size() > 1 ? edge_tail(w[0], w[1], h, decays) : 0.0;
  out[0] = acc;
  for (size_t i = 1; i < w.size(); ++i) {
    acc += 0.5 * h * (w[i - 1] + w[i]);
    out[i] = acc;
  }
  return out;
}

MetricProfile fs_background(const Grid& grid) {
  MetricProfile p;
  p.grid = grid;
  p.background = true;
  p.w.resize(grid.N);
  for (int i = 0; i < grid.N; ++i) p.w[i] = fs_density(grid.s(i));
  return p;
}

void require_positive(const MetricProfile& p) {
  if (static_cast<int>(p.w.size()) != p.grid.N)
    fail(ErrorCode::InvalidArgument, "profile has " + std::to_string(p.w.size()) + " samples, grid expects " +
                                         std::to_string(p.grid.N));
  for (size_t i = 0; i < p.w.size(); ++i) {
    if (!(p.w[i] > 0.0))
      fail(ErrorCode::NonPositiveDensity,
           "w[" + std::to_string(i) + "] = " + fmt_double(p.w[i]) + " at s = " + fmt_double(p.grid.s(int(i))));
  }
}

bool conforms_to_class(const MetricProfile& p, double rel_tol) {
  return std::abs(p.volume() - kClassVolume) <= rel_tol * kClassVolume;
}

void require_class(const MetricProfile& p) {
  require_positive(p);
  if (!conforms_to_class(p))
    fail(ErrorCode::NonConformingProfile,
         "volume " + fmt_double(p.volume()) + " differs from the class volume 4*pi");
}

const std::vector<std::string>& perturbation_families() {
  static const std::vector<std::string> names = {"fs", "sech2", "sech"};
  return names;
}

MetricProfile perturbed_profile(const Grid& grid, std::string_view family, double amplitude) {
  MetricProfile p = fs_background(grid);
  p.background = false;
  if (family == "fs") {
    p.background = amplitude == 0.0;
    return p;
  }
  std::vector<double> bump(grid.N), base(grid.N);
  for (int i = 0; i < grid.N; ++i) {
    double s = grid.s(i);
    if (family == "sech2") {
      double c = 1.0 / std::cosh(s);
      bump[i] = c * c;
    } else if (family == "sech") {
      bump[i] = 1.0 / std::cosh(s);
    } else {
      fail(ErrorCode::InvalidArgument, "unknown perturbation family '" + std::string(family) + "'");
    }
    double c2 = 1.0 / std::cosh(0.5 * s);
    base[i] = c2 * c2;
  }
  // Subtract a multiple of sech^2(s/2) so the discrete volume stays in the class.
  std::vector<double> wb(grid.N), wc(grid.N);
  for (int i = 0; i < grid.N; ++i) {
    wb[i] = p.w[i] * bump[i];
    wc[i] = p.w[i] * base[i];
  }
  const double c = integrate(wb, grid.h()) / integrate(wc, grid.h());
  for (int i = 0; i < grid.N; ++i) p.w[i] *= 1.0 + amplitude * (bump[i] - c * base[i]);
  require_positive(p);
  return p;
}

std::vector<double> first_difference(std::span<const double> f, double h) {
  const size_t n = f.size();
  std::vector<double> d(n);
  for (size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return d;
}

std::vector<double> second_difference(std::span<const double> f, double h) {
  const size_t n = f.size();
  const double ih2 = 1.0 / (h * h);
  std::vector<double> d(n);
  for (size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * ih2;
  d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * ih2;
  d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * ih2;
  return d;
}

void second_difference_neumann(std::span<const double> f, double h, std::span<double> out) {
  const size_t n = f.size();
  const double ih2 = 1.0 / (h * h);
  for (size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * ih2;
  out[0] = 2.0 * (f[1] - f[0]) * ih2;
  out[n - 1] = 2.0 * (f[n - 2] - f[n - 1]) * ih2;
}

std::vector<double> second_difference_neumann(std::span<const double> f, double h) {
  std::vector<double> d(f.size());
  second_difference_neumann(f, h, d);
  return d;
}

std::vector<double> second_difference_4th(std::span<const double> f, double h) {
  const size_t n = f.size();
  const double ih2 = 1.0 / (12.0 * h * h);
  std::vector<double> d = second_difference(f, h);
  for (size_t i = 2; i + 2 < n; ++i)
    d[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) * ih2;
  return d;
}

std::vector<double> log_ratio(const MetricProfile& p) {
  std::vector<double> eta(p.w.size());
  for (int i = 0; i < p.grid.N; ++i) eta[i] = std::log(p.w[i] / fs_density(p.grid.s(i)));
  return eta;
}

std::vector<double> log_density_slope(const MetricProfile& p) {
  auto d = first_difference(log_ratio(p), p.grid.h());
  for (int i = 0; i < p.grid.N; ++i) d[i] += fs_log_slope(p.grid.s(i));
  return d;
}

std::vector<double> reconstruct_potential(const MetricProfile& p) {
  const int n = p.grid.N;
  const double h = p.grid.h();
  std::vector<double> phi(n, 0.0);
  double slope = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    double g = p.w[i] - fs_density(p.grid.s(i));
    slope += (i == 0 ? 0.5 : 1.0) * g;
    phi[i + 1] = phi[i] + h * h * slope;
  }
  return phi;
}

GeometryReport curvature(const MetricProfile& p) {
  require_positive(p);
  const int n = p.grid.N;
  const double h = p.grid.h();
  GeometryReport rep;
  const auto eta = log_ratio(p);
  const auto d2eta = second_difference(eta, h);
  rep.K.resize(n);
  for (int i = 0; i < n; ++i) rep.K[i] = (fs_density(p.grid.s(i)) - d2eta[i]) / p.w[i];
  rep.R = rep.K;
  rep.riemannian_scalar.resize(n);
  for (int i = 0; i < n; ++i) rep.riemannian_scalar[i] = 2.0 * rep.K[i];

  std::vector<double> tmp(n);
  for (int i = 0; i < n; ++i) tmp[i] = std::sqrt(0.5 * p.w[i]);
  rep.diam = integrate(tmp, h);
  rep.V = p.volume();
  for (int i = 0; i < n; ++i) tmp[i] = rep.K[i] * p.w[i];
  rep.gauss_bonnet = kTwoPi * integrate(tmp, h);

  const auto phi = reconstruct_potential(p);
  rep.u.resize(n);
  for (int i = 0; i < n; ++i) rep.u[i] = eta[i] + phi[i];
  // The normalization (1/V) int e^{-u} w_phi = 1 is multiplicative in e^{-c}.
  const double umin = *std::min_element(rep.u.begin(), rep.u.end());
  for (int i = 0; i < n; ++i) tmp[i] = std::exp(-(rep.u[i] - umin)) * p.w[i];
  const double mass = kTwoPi * integrate(tmp, h) / rep.V;
  if (!(mass > 0.0) || !std::isfinite(mass))
    fail(ErrorCode::NormalizationFailure, "Ricci potential normalization integral is " + fmt_double(mass));
  rep.u_constant = std::log(mass) - umin;
  for (int i = 0; i < n; ++i) rep.u[i] += rep.u_constant;
  for (int i = 0; i < n; ++i) tmp[i] = std::exp(-rep.u[i]) * p.w[i];
  const double check = kTwoPi * integrate(tmp, h) / rep.V;
  if (std::abs(check - 1.0) > 1e-12)
    fail(ErrorCode::NormalizationFailure, "normalization residual " + fmt_double(check - 1.0));

  const auto du = first_difference(rep.u, h);
  for (int i = 0; i < n; ++i) {
    rep.sup_grad_u = std::max(rep.sup_grad_u, std::abs(du[i]) / std::sqrt(p.w[i]));
    rep.sup_abs_u = std::max(rep.sup_abs_u, std::abs(rep.u[i]));
    rep.sup_abs_R = std::max(rep.sup_abs_R, std::abs(rep.R[i]));
  }
  return rep;
}

double ricci_potential_residual(const MetricProfile& p, const GeometryReport& rep) {
  const auto d2u = second_difference(rep.u, p.grid.h());
  double r = 0.0;
  for (int i = 1; i + 1 < p.grid.N; ++i) r = std::max(r, std::abs(d2u[i] - (1.0 - rep.K[i]) * p.w[i]));
  return r;
}

namespace {

// Meridian data in arclength: sigma_i, circle radius f = sqrt(2w), f' = (log w)', K.
struct Meridian {
  std::vector<double> sigma, f, fp, K, mass;
  double length = 0.0;

  size_t locate(double x) const {
    auto it = std::upper_bound(sigma.begin(), sigma.end(), x);
    size_t j = it == sigma.begin() ? 0 : size_t(it - sigma.begin()) - 1;
    return std::min(j, sigma.size() - 2);
  }
  double frac(size_t j, double x) const { return (x - sigma[j]) / (sigma[j + 1] - sigma[j]); }
  void at(double x, double& fv, double& fpv, double& kv) const {
    size_t j = locate(x);
    double t = frac(j, x);
    fv = f[j] + t * (f[j + 1] - f[j]);
    fpv = fp[j] + t * (fp[j + 1] - fp[j]);
    kv = K[j] + t * (K[j + 1] - K[j]);
  }
  double mass_below(double x) const {
    size_t j = locate(x);
    double t = frac(j, x);
    return mass[j] + t * (mass[j + 1] - mass[j]);
  }
};

Meridian build_meridian(const MetricProfile& p) {
  const int n = p.grid.N;
  const double h = p.grid.h();
  Meridian m;
  m.K = curvature(p).K;
  m.fp = log_density_slope(p);
  m.mass = p.moment();
  m.f.resize(n);
  m.sigma.resize(n);
  std::vector<double> speed(n);
  for (int i = 0; i < n; ++i) {
    speed[i] = std::sqrt(0.5 * p.w[i]);
    m.f[i] = std::sqrt(2.0 * p.w[i]);
  }
  bool decays = true;
  double acc = edge_tail(speed[0], speed[1], h, decays);
  m.sigma[0] = acc;
  for (int i = 1; i < n; ++i) {
    acc += 0.5 * h * (speed[i - 1] + speed[i]);
    m.sigma[i] = acc;
  }
  m.length = acc + edge_tail(speed[n - 1], speed[n - 2], h, decays);
  return m;
}

}  // namespace

double volume_ratio(const MetricProfile& p, double center, double r) {
  if (!(r > 0.0) || r > 1.0) fail(ErrorCode::RadiusOutOfRange, "radius must lie in (0, 1], got " + fmt_double(r));
  require_positive(p);
  const Meridian m = build_meridian(p);
  const double lo = m.sigma.front(), hi = m.sigma.back();

  if (std::isinf(center)) {
    // Around a pole the ball is a polar cap {sigma < r}.
    const double edge = center < 0 ? r : m.length - r;
    if (edge <= lo || edge >= hi)
      fail(ErrorCode::RadiusOutOfRange, "polar cap of radius " + fmt_double(r) + " leaves the window");
    const double below = m.mass_below(edge);
    const double area = center < 0 ? below : m.mass.back() - below;
    return kTwoPi * area / (r * r);
  }

  if (center < p.grid.s(0) || center > p.grid.s(p.grid.N - 1))
    fail(ErrorCode::RadiusOutOfRange, "center s = " + fmt_double(center) + " lies outside the window");
  const double sh = (center + p.grid.L) / p.grid.h();
  const size_t jc = std::min<size_t>(size_t(sh), p.w.size() - 2);
  const double sigma0 = m.sigma[jc] + (sh - double(jc)) * (m.sigma[jc + 1] - m.sigma[jc]);
  if (sigma0 - r <= lo || sigma0 + r >= hi)
    fail(ErrorCode::RadiusOutOfRange, "geodesic ball of radius " + fmt_double(r) + " reaches a pole");

  double f0, fp0, k0;
  m.at(sigma0, f0, fp0, k0);
  const int n_dir = 64;
  const int n_steps = 400;
  const double dr = r / n_steps;
  double area = 0.0;
  for (int a = 0; a < n_dir; ++a) {
    const double psi = kTwoPi * (a + 0.5) / n_dir;
    const double c = f0 * std::sin(psi);  // Clairaut constant f^2 theta'
    // (sigma, sigma', J, J', int J): geodesic, Jacobi field, accumulated length element.
    double y[5] = {sigma0, std::cos(psi), 0.0, 1.0, 0.0};
    auto rhs = [&](const double* s, double* d) {
      double fv, fpv, kv;
      m.at(s[0], fv, fpv, kv);
      d[0] = s[1];
      d[1] = c * c * fpv / (fv * fv * fv);
      d[2] = s[3];
      d[3] = -kv * s[2];
      d[4] = s[2];
    };
    for (int st = 0; st < n_steps; ++st) {
      double k1[5], k2[5], k3[5], k4[5], tmp[5];
      rhs(y, k1);
      for (int q = 0; q < 5; ++q) tmp[q] = y[q] + 0.5 * dr * k1[q];
      rhs(tmp, k2);
      for (int q = 0; q < 5; ++q) tmp[q] = y[q] + 0.5 * dr * k2[q];
      rhs(tmp, k3);
      for (int q = 0; q < 5; ++q) tmp[q] = y[q] + dr * k3[q];
      rhs(tmp, k4);
      for (int q = 0; q < 5; ++q) y[q] += dr / 6.0 * (k1[q] + 2 * k2[q] + 2 * k3[q] + k4[q]);
      if (y[0] <= lo || y[0] >= hi)
        fail(ErrorCode::RadiusOutOfRange, "geodesic ball of radius " + fmt_double(r) + " reaches a pole");
    }
    area += y[4];
  }
  area *= kTwoPi / n_dir;
  return area / (r * r);
}

ProductGeometry product_compose(const MetricProfile& a, const MetricProfile& b) {
  ProductGeometry g;
  g.a = a;
  g.b = b;
  g.ra = curvature(a);
  g.rb = curvature(b);
  g.volume = g.ra.V * g.rb.V;
  g.diam = std::hypot(g.ra.diam, g.rb.diam);
  g.sup_R = *std::max_element(g.ra.R.begin(), g.ra.R.end()) + *std::max_element(g.rb.R.begin(), g.rb.R.end());
  g.inf_R = *std::min_element(g.ra.R.begin(), g.ra.R.end()) + *std::min_element(g.rb.R.begin(), g.rb.R.end());
  return g;
}

void write_profile(std::ostream& os, const MetricProfile& p) {
  os << "# krf-profile L=" << fmt_double(p.grid.L) << " N=" << p.grid.N << " convention=" << kConventionVersion
     << " background=" << (p.background ? 1 : 0) << "\n";
  os << "s w\n";
  for (int i = 0; i < p.grid.N; ++i) os << fmt_double(p.grid.s(i)) << ' ' << fmt_double(p.w[i]) << '\n';
}

MetricProfile read_profile(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# krf-profile", 0) != 0)
    fail(ErrorCode::ParseError, "profile table must start with '# krf-profile'");
  std::istringstream hs(line.substr(13));
  std::string tok;
  double L = 0;
  int N = 0;
  bool bg = false;
  std::string convention;
  while (hs >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) fail(ErrorCode::ParseError, "bad header token '" + tok + "'");
    auto key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "L") L = parse_double(val);
    else if (key == "N") N = std::stoi(val);
    else if (key == "convention") convention = val;
    else if (key == "background") bg = val == "1";
    else fail(ErrorCode::ParseError, "unknown header key '" + key + "'");
  }
  if (convention != kConventionVersion)
    fail(ErrorCode::ParseError, "profile convention '" + convention + "' is not " + kConventionVersion);
  MetricProfile p;
  p.grid = Grid(L, N);
  p.background = bg;
  if (!std::getline(is, line) || line != "s w") fail(ErrorCode::ParseError, "missing column line 's w'");
  p.w.reserve(N);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b;
    if (!(ls >> a >> b)) fail(ErrorCode::ParseError, "bad profile row '" + line + "'");
    double s = parse_double(a);
    int i = int(p.w.size());
    if (i >= N) fail(ErrorCode::ParseError, "more rows than N = " + std::to_string(N));
    if (std::abs(s - p.grid.s(i)) > 1e-9 * (1.0 + L))
      fail(ErrorCode::ParseError, "row " + std::to_string(i) + " has s = " + a + " off the grid");
    p.w.push_back(parse_double(b));
  }
  if (int(p.w.size()) != N)
    fail(ErrorCode::ParseError, "expected " + std::to_string(N) + " rows, got " + std::to_string(p.w.size()));
  return p;
}

}  // namespace krf
