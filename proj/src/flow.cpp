#include "krf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "krf/errors.hpp"
#include "krf/format.hpp"

namespace krf {

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::SDIRK3: return "sdirk3";
    case Scheme::SDIRK2: return "sdirk2";
    case Scheme::RK4: return "rk4";
    case Scheme::Euler: return "euler";
  }
  return "?";
}

std::string_view to_string(Gauge g) {
  switch (g) {
    case Gauge::Raw: return "raw";
    case Gauge::Shoot: return "shoot";
    case Gauge::DensityOnly: return "density-only";
  }
  return "?";
}

Scheme parse_scheme(std::string_view text) {
  if (text == "sdirk3") return Scheme::SDIRK3;
  if (text == "sdirk2") return Scheme::SDIRK2;
  if (text == "rk4") return Scheme::RK4;
  if (text == "euler") return Scheme::Euler;
  fail(ErrorCode::InvalidArgument, "unknown scheme '" + std::string(text) + "'");
}

Gauge parse_gauge(std::string_view text) {
  if (text == "raw") return Gauge::Raw;
  if (text == "shoot") return Gauge::Shoot;
  if (text == "density-only") return Gauge::DensityOnly;
  fail(ErrorCode::InvalidArgument, "unknown gauge '" + std::string(text) + "'");
}

bool is_explicit(Scheme s) { return s == Scheme::RK4 || s == Scheme::Euler; }

double stability_bound(const MetricProfile& p, double safety) {
  const double h = p.grid.h();
  return safety * h * h * p.min_density() / 2.0;
}

namespace {

using Vec = std::vector<double>;

std::vector<double> fs_samples(const Grid& g) { return fs_background(g).w; }

struct Tridiag {
  Vec lo, di, up;
  explicit Tridiag(size_t n) : lo(n), di(n), up(n) {}
};

// Thomas algorithm; the matrices here are diagonally dominant for positive w.
void solve_tridiag(Tridiag& m, Vec& x) {
  const size_t n = x.size();
  for (size_t i = 1; i < n; ++i) {
    double f = m.lo[i] / m.di[i - 1];
    m.di[i] -= f * m.up[i - 1];
    x[i] -= f * x[i - 1];
  }
  x[n - 1] /= m.di[n - 1];
  for (size_t i = n - 1; i-- > 0;) x[i] = (x[i] - m.up[i] * x[i + 1]) / m.di[i];
}

class System {
 public:
  virtual ~System() = default;
  virtual void rhs(const Vec& y, Vec& out) const = 0;
  virtual void jacobian(const Vec& y, Tridiag& J) const = 0;
  virtual bool admissible(const Vec& y) const = 0;
  virtual double atol() const = 0;
  virtual std::string describe_failure(const Vec& y) const = 0;
};

// Neumann second-difference coefficients of row i: (left, centre, right) in units of 1/h^2.
void neumann_row(size_t i, size_t n, double& l, double& c, double& r) {
  c = -2.0;
  l = (i == 0) ? 0.0 : (i + 1 == n ? 2.0 : 1.0);
  r = (i + 1 == n) ? 0.0 : (i == 0 ? 2.0 : 1.0);
}

class DensitySystem final : public System {
 public:
  DensitySystem(const Grid& g) : w0_(fs_samples(g)), h_(g.h()), eta_(g.N) {}

  void rhs(const Vec& y, Vec& out) const override {
    for (size_t i = 0; i < y.size(); ++i) eta_[i] = std::log(y[i] / w0_[i]);
    second_difference_neumann(eta_, h_, out);
    for (size_t i = 0; i < y.size(); ++i) out[i] += y[i] - w0_[i];
  }
  void jacobian(const Vec& y, Tridiag& J) const override {
    const size_t n = y.size();
    const double ih2 = 1.0 / (h_ * h_);
    for (size_t i = 0; i < n; ++i) {
      double l, c, r;
      neumann_row(i, n, l, c, r);
      J.lo[i] = i > 0 ? l * ih2 / y[i - 1] : 0.0;
      J.di[i] = c * ih2 / y[i] + 1.0;
      J.up[i] = i + 1 < n ? r * ih2 / y[i + 1] : 0.0;
    }
  }
  bool admissible(const Vec& y) const override {
    return std::all_of(y.begin(), y.end(), [](double v) { return v > 0.0 && std::isfinite(v); });
  }
  double atol() const override { return 1e-22; }
  std::string describe_failure(const Vec& y) const override {
    for (size_t i = 0; i < y.size(); ++i)
      if (!(y[i] > 0.0)) return "w[" + std::to_string(i) + "] = " + fmt_double(y[i]);
    return "non-finite density";
  }

 private:
  Vec w0_;
  double h_;
  mutable Vec eta_;
};

class PotentialSystem final : public System {
 public:
  PotentialSystem(const Grid& g) : w0_(fs_samples(g)), h_(g.h()), w_(g.N) {}

  void density(const Vec& phi, Vec& w) const {
    second_difference_neumann(phi, h_, w);
    for (size_t i = 0; i < w.size(); ++i) w[i] += w0_[i];
  }
  void rhs(const Vec& y, Vec& out) const override {
    density(y, w_);
    for (size_t i = 0; i < y.size(); ++i) out[i] = std::log(w_[i] / w0_[i]) + y[i];
  }
  void jacobian(const Vec& y, Tridiag& J) const override {
    density(y, w_);
    const size_t n = y.size();
    const double ih2 = 1.0 / (h_ * h_);
    for (size_t i = 0; i < n; ++i) {
      double l, c, r;
      neumann_row(i, n, l, c, r);
      J.lo[i] = l * ih2 / w_[i];
      J.di[i] = c * ih2 / w_[i] + 1.0;
      J.up[i] = r * ih2 / w_[i];
    }
  }
  bool admissible(const Vec& y) const override {
    density(y, w_);
    return std::all_of(w_.begin(), w_.end(), [](double v) { return v > 0.0 && std::isfinite(v); }) &&
           std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
  }
  double atol() const override { return 1e-14; }
  std::string describe_failure(const Vec& y) const override {
    density(y, w_);
    for (size_t i = 0; i < w_.size(); ++i)
      if (!(w_[i] > 0.0)) return "w0 + phi''[" + std::to_string(i) + "] = " + fmt_double(w_[i]);
    return "non-finite potential";
  }

 private:
  Vec w0_;
  double h_;
  mutable Vec w_;
};

struct Tableau {
  int stages;
  double gamma;
  std::vector<std::vector<double>> a;  // strictly lower part
};

const Tableau& tableau(Scheme s) {
  static const Tableau sdirk3 = [] {
    // L-stable, stiffly accurate three-stage method of order 3.
    const double g = 0.43586652150845899941601945;
    const double b1 = -1.5 * g * g + 4.0 * g - 0.25;
    const double b2 = 1.5 * g * g - 5.0 * g + 1.25;
    return Tableau{3, g, {{}, {0.5 * (1.0 - g)}, {b1, b2}}};
  }();
  static const Tableau sdirk2 = [] {
    const double g = 1.0 - std::sqrt(0.5);
    return Tableau{2, g, {{}, {1.0 - g}}};
  }();
  return s == Scheme::SDIRK2 ? sdirk2 : sdirk3;
}

Vec implicit_step(const System& sys, const Vec& y, double dt, Scheme scheme) {
  const Tableau& tb = tableau(scheme);
  const size_t n = y.size();
  const double gdt = tb.gamma * dt;
  std::vector<Vec> k(tb.stages, Vec(n));
  Vec Y = y, base(n), f(n), delta(n), trial(n);
  Tridiag J(n);
  for (int st = 0; st < tb.stages; ++st) {
    base = y;
    for (int j = 0; j < st; ++j)
      for (size_t i = 0; i < n; ++i) base[i] += dt * tb.a[st][j] * k[j][i];
    bool converged = false;
    for (int it = 0; it < 40 && !converged; ++it) {
      sys.rhs(Y, f);
      for (size_t i = 0; i < n; ++i) delta[i] = -(Y[i] - base[i] - gdt * f[i]);
      sys.jacobian(Y, J);
      for (size_t i = 0; i < n; ++i) {
        J.lo[i] *= -gdt;
        J.di[i] = 1.0 - gdt * J.di[i];
        J.up[i] *= -gdt;
      }
      solve_tridiag(J, delta);
      double lambda = 1.0;
      for (;;) {
        for (size_t i = 0; i < n; ++i) trial[i] = Y[i] + lambda * delta[i];
        if (sys.admissible(trial)) break;
        lambda *= 0.5;
        if (lambda < 1e-6) fail(ErrorCode::PositivityLoss, "implicit stage left the Kahler cone: " + sys.describe_failure(trial));
      }
      converged = lambda == 1.0;
      for (size_t i = 0; i < n; ++i) {
        if (std::abs(lambda * delta[i]) > 1e-12 * std::abs(trial[i]) + sys.atol()) converged = false;
      }
      Y.swap(trial);
    }
    if (!converged) fail(ErrorCode::SolverFailure, "Newton iteration did not converge in an implicit stage");
    for (size_t i = 0; i < n; ++i) k[st][i] = (Y[i] - base[i]) / gdt;
  }
  return Y;  // stiffly accurate: the last stage is the step result
}

Vec explicit_step(const System& sys, const Vec& y, double dt, Scheme scheme) {
  const size_t n = y.size();
  Vec k1(n);
  sys.rhs(y, k1);
  if (scheme == Scheme::Euler) {
    Vec out(n);
    for (size_t i = 0; i < n; ++i) out[i] = y[i] + dt * k1[i];
    return out;
  }
  Vec k2(n), k3(n), k4(n), tmp(n);
  for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
  sys.rhs(tmp, k2);
  for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
  sys.rhs(tmp, k3);
  for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
  sys.rhs(tmp, k4);
  Vec out(n);
  for (size_t i = 0; i < n; ++i) out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

void check_explicit_step(const MetricProfile& p, double dt, Scheme scheme, double safety) {
  if (!is_explicit(scheme)) return;
  const double bound = stability_bound(p, safety);
  if (dt > bound)
    fail(ErrorCode::StabilityViolation,
         "dt = " + fmt_double(dt) + " exceeds the parabolic bound " + fmt_double(bound));
}

void check_positive(const Vec& w, const Grid& g, double t) {
  for (size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] > 0.0) || !std::isfinite(w[i]))
      fail(ErrorCode::PositivityLoss, "w[" + std::to_string(i) + "] = " + fmt_double(w[i]) + " at s = " +
                                          fmt_double(g.s(int(i))) + ", t = " + fmt_double(t));
  }
}

}  // namespace

MetricProfile density_from_potential(const Grid& grid, std::span<const double> phi) {
  MetricProfile p = fs_background(grid);
  p.background = false;
  auto d2 = second_difference_neumann(phi, grid.h());
  for (int i = 0; i < grid.N; ++i) p.w[i] += d2[i];
  return p;
}

std::vector<double> potential_velocity(const MetricProfile& p, std::span<const double> phi) {
  auto v = log_ratio(p);
  for (size_t i = 0; i < v.size(); ++i) v[i] += phi[i];
  return v;
}

double mean_velocity(const FlowState& state) {
  if (!state.has_potential()) fail(ErrorCode::MissingPotential, "state carries no potential");
  const auto& w = state.profile.w;
  Vec prod(w.size());
  for (size_t i = 0; i < w.size(); ++i) prod[i] = state.phidot[i] * w[i];
  const double h = state.profile.grid.h();
  return integrate(prod, h) / integrate(w, h);
}

FlowState density_state(const MetricProfile& p) {
  require_positive(p);
  FlowState s;
  s.profile = p;
  s.gauge = Gauge::DensityOnly;
  attach_potential(s);
  return s;
}

void attach_potential(FlowState& state) {
  const auto& p = state.profile;
  state.phi = reconstruct_potential(p);
  state.phidot = potential_velocity(p, state.phi);
  Vec prod(p.w.size());
  for (size_t i = 0; i < prod.size(); ++i) prod[i] = state.phidot[i] * p.w[i];
  const double c = -integrate(prod, p.grid.h()) / integrate(p.w, p.grid.h());
  for (auto& v : state.phi) v += c;
  for (auto& v : state.phidot) v += c;
  state.gauge_constant = c;
}

FlowState potential_state(const Grid& grid, std::vector<double> phi0, Gauge gauge) {
  if (gauge == Gauge::DensityOnly) fail(ErrorCode::InvalidArgument, "potential form needs gauge raw or shoot");
  if (static_cast<int>(phi0.size()) != grid.N)
    fail(ErrorCode::InvalidArgument, "potential has " + std::to_string(phi0.size()) + " samples, grid has " +
                                         std::to_string(grid.N));
  FlowState s;
  s.profile = density_from_potential(grid, phi0);
  check_positive(s.profile.w, grid, 0.0);
  s.phi = std::move(phi0);
  s.phidot = potential_velocity(s.profile, s.phi);
  s.gauge = gauge;
  return s;
}

FlowState step_density(const FlowState& state, double dt, Scheme scheme, double safety) {
  const Grid& g = state.profile.grid;
  require_positive(state.profile);
  check_explicit_step(state.profile, dt, scheme, safety);
  DensitySystem sys(g);
  Vec w = is_explicit(scheme) ? explicit_step(sys, state.profile.w, dt, scheme)
                              : implicit_step(sys, state.profile.w, dt, scheme);
  FlowState out;
  out.t = state.t + dt;
  out.gauge = Gauge::DensityOnly;
  check_positive(w, g, out.t);
  // The volume is neutral for the exact flow but grows like e^t under discretization.
  const double target = fs_background(g).volume();
  const double scale = target / (kTwoPi * integrate(w, g.h()));
  for (auto& v : w) v *= scale;
  out.profile = state.profile;
  out.profile.w = std::move(w);
  out.profile.background = false;
  if (state.has_potential()) attach_potential(out);
  return out;
}

FlowState step_potential(const FlowState& state, double dt, Scheme scheme, double safety) {
  if (!state.has_potential()) fail(ErrorCode::MissingPotential, "potential step needs phi");
  if (state.gauge == Gauge::DensityOnly) fail(ErrorCode::InvalidArgument, "potential form needs gauge raw or shoot");
  const Grid& g = state.profile.grid;
  check_explicit_step(state.profile, dt, scheme, safety);
  PotentialSystem sys(g);
  Vec phi = is_explicit(scheme) ? explicit_step(sys, state.phi, dt, scheme)
                                : implicit_step(sys, state.phi, dt, scheme);
  FlowState out;
  out.t = state.t + dt;
  out.gauge = state.gauge;
  out.gauge_constant = state.gauge_constant;
  out.profile = density_from_potential(g, phi);
  check_positive(out.profile.w, g, out.t);
  out.phidot = potential_velocity(out.profile, phi);
  out.phi = std::move(phi);
  return out;
}

namespace {

template <class Step>
FlowRun drive(FlowState state, const FlowConfig& cfg, Step step, const SnapshotHook& hook) {
  if (!(cfg.T > 0.0)) fail(ErrorCode::InvalidArgument, "horizon T must be positive");
  if (!(cfg.snapshot_every > 0.0)) fail(ErrorCode::InvalidArgument, "snapshot cadence must be positive");
  FlowRun run;
  auto record = [&](const FlowState& s) {
    if (hook) hook(s);
    run.snapshots.push_back(s);
  };
  record(state);
  const long n_snap = std::max(1L, std::lround(std::ceil(cfg.T / cfg.snapshot_every - 1e-9)));
  double t_prev = 0.0;
  for (long k = 1; k <= n_snap; ++k) {
    const double t_next = std::min(cfg.T, double(k) * cfg.snapshot_every);
    const double span = t_next - t_prev;
    if (cfg.dt > 0.0) {
      const long n_sub = std::max(1L, std::lround(std::ceil(span / cfg.dt - 1e-9)));
      const double sub = span / double(n_sub);
      for (long j = 0; j < n_sub; ++j) state = step(state, sub);
    } else {
      // Adaptive explicit stepping at the parabolic bound.
      while (state.t < t_next - 1e-12 * (1.0 + t_next)) {
        double sub = std::min(stability_bound(state.profile, cfg.safety), t_next - state.t);
        state = step(state, sub);
      }
    }
    state.t = t_next;
    record(state);
    t_prev = t_next;
  }
  return run;
}

}  // namespace

FlowRun run_density(const MetricProfile& init, const FlowConfig& cfg, const SnapshotHook& hook) {
  if (cfg.dt <= 0.0 && !is_explicit(cfg.scheme))
    fail(ErrorCode::InvalidArgument, "automatic dt is only defined for explicit schemes");
  FlowState s = density_state(init);
  return drive(std::move(s), cfg,
               [&](const FlowState& st, double dt) { return step_density(st, dt, cfg.scheme, cfg.safety); }, hook);
}

FlowRun run_potential(std::vector<double> phi0, const FlowConfig& cfg, const SnapshotHook& hook) {
  if (cfg.dt <= 0.0 && !is_explicit(cfg.scheme))
    fail(ErrorCode::InvalidArgument, "automatic dt is only defined for explicit schemes");
  double c = 0.0;
  if (cfg.gauge == Gauge::Shoot) {
    c = shoot_constant(phi0, cfg);
    for (auto& v : phi0) v += c;
  }
  FlowState s = potential_state(cfg.grid, std::move(phi0), cfg.gauge);
  s.gauge_constant = c;
  return drive(std::move(s), cfg,
               [&](const FlowState& st, double dt) { return step_potential(st, dt, cfg.scheme, cfg.safety); }, hook);
}

double shoot_constant(std::span<const double> phi0, const FlowConfig& cfg) {
  FlowConfig quiet = cfg;
  quiet.gauge = Gauge::Raw;
  quiet.snapshot_every = cfg.T;
  auto horizon_mean = [&](double c) {
    std::vector<double> phi(phi0.begin(), phi0.end());
    for (auto& v : phi) v += c;
    FlowState s = potential_state(cfg.grid, std::move(phi), Gauge::Raw);
    auto run = drive(std::move(s), quiet,
                     [&](const FlowState& st, double dt) { return step_potential(st, dt, cfg.scheme, cfg.safety); },
                     {});
    return mean_velocity(run.snapshots.back());
  };
  const double tol = cfg.shoot_tolerance;
  double scale = 1e-3;
  for (double v : phi0) scale = std::max(scale, 1e-3 * std::abs(v));
  const double f0 = horizon_mean(0.0);
  if (std::abs(f0) <= tol) return 0.0;
  const double growth = (horizon_mean(scale) - f0) / scale;
  if (!(growth > 0.0) || !std::isfinite(growth))
    fail(ErrorCode::ShootFailure, "horizon mean velocity is not increasing in the initial constant");
  // The constant mode is linear, so the secant guess is nearly exact; bisect around it.
  const double guess = -f0 / growth;
  double lo = guess, hi = guess;
  double flo = horizon_mean(guess);
  if (std::abs(flo) <= tol) return guess;
  double fhi = flo;
  double width = std::max(std::abs(flo) / growth, 1e-15 * (1.0 + std::abs(guess)));
  for (int k = 0; k < 60 && flo * fhi > 0.0; ++k) {
    lo = guess - width;
    hi = guess + width;
    flo = horizon_mean(lo);
    fhi = horizon_mean(hi);
    width *= 4.0;
  }
  if (flo * fhi > 0.0) fail(ErrorCode::ShootFailure, "could not bracket the initial constant");
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double fm = horizon_mean(mid);
    if (std::abs(fm) <= tol) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(mid))) break;
  }
  fail(ErrorCode::ShootFailure, "bisection stalled above tolerance " + fmt_double(tol));
}

double max_deviation_from_fs(const MetricProfile& p) {
  double m = 0.0;
  for (int i = 0; i < p.grid.N; ++i) m = std::max(m, std::abs(p.w[i] - fs_density(p.grid.s(i))));
  return m;
}

namespace {

struct MonitorCurvature {
  Vec K, rhs;
};

MonitorCurvature monitor_curvature(const MetricProfile& p) {
  const int n = p.grid.N;
  const double h = p.grid.h();
  MonitorCurvature m;
  const auto d4eta = second_difference_4th(log_ratio(p), h);
  m.K.resize(n);
  for (int i = 0; i < n; ++i) m.K[i] = (fs_density(p.grid.s(i)) - d4eta[i]) / p.w[i];
  const auto d4K = second_difference_4th(m.K, h);
  m.rhs.resize(n);
  for (int i = 0; i < n; ++i) m.rhs[i] = d4K[i] / p.w[i] + m.K[i] * m.K[i] - m.K[i];
  return m;
}

}  // namespace

std::vector<double> scalar_evolution_residual(std::span<const FlowState> run, double core_density) {
  if (run.size() < 2) fail(ErrorCode::InsufficientSnapshots, "need at least two snapshots, got " + std::to_string(run.size()));
  std::vector<double> out;
  MonitorCurvature prev = monitor_curvature(run[0].profile);
  for (size_t j = 1; j < run.size(); ++j) {
    const double dt = run[j].t - run[j - 1].t;
    if (!(dt > 0.0)) fail(ErrorCode::InsufficientSnapshots, "snapshot times must increase");
    if (!(run[j].profile.grid == run[0].profile.grid))
      fail(ErrorCode::InvalidArgument, "snapshots on different grids");
    MonitorCurvature cur = monitor_curvature(run[j].profile);
    const int n = run[j].profile.grid.N;
    double r = 0.0;
    for (int i = 3; i + 3 < n; ++i) {
      if (run[j].profile.w[i] < core_density || run[j - 1].profile.w[i] < core_density) continue;
      const double lhs = (cur.K[i] - prev.K[i]) / dt;
      r = std::max(r, std::abs(lhs - 0.5 * (cur.rhs[i] + prev.rhs[i])));
    }
    out.push_back(r);
    prev = std::move(cur);
  }
  return out;
}

double fitted_decay_rate(std::span<const double> t, std::span<const double> deviation, double t_from, double floor) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_from - 1e-12 || !(deviation[i] > floor)) continue;
    const double y = std::log(deviation[i]);
    sx += t[i];
    sy += y;
    sxx += t[i] * t[i];
    sxy += t[i] * y;
    ++m;
  }
  if (m < 2) return 0.0;
  const double den = m * sxx - sx * sx;
  if (den <= 0.0) return 0.0;
  return (m * sxy - sx * sy) / den;
}

}  // namespace krf
