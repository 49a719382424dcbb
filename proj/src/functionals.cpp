#include "krf/functionals.hpp"

#include <algorithm>
#include <cmath>

#include "krf/errors.hpp"

namespace krf {

namespace {

double reference_volume(const Grid& g) { return fs_background(g).volume(); }

void require_potential(const FlowState& s) {
  if (!s.has_potential()) fail(ErrorCode::MissingPotential, "state at t = " + std::to_string(s.t) + " has no potential");
}

}  // namespace

double dirichlet_energy(std::span<const double> f, const Grid& grid) {
  const double h = grid.h();
  double acc = 0.0;
  for (size_t i = 0; i + 1 < f.size(); ++i) {
    const double d = f[i + 1] - f[i];
    acc += d * d / h;
  }
  return kTwoPi * acc / reference_volume(grid);
}

FunctionalReport report(const FlowState& state) {
  require_potential(state);
  const auto& p = state.profile;
  const auto& phi = state.phi;
  const int n = p.grid.N;
  const double h = p.grid.h();
  const double V = reference_volume(p.grid);
  FunctionalReport r;
  r.sup_phi = *std::max_element(phi.begin(), phi.end());
  r.inf_phi = *std::min_element(phi.begin(), phi.end());
  r.osc_phi = r.sup_phi - r.inf_phi;
  r.sup_abs_phi = std::max(std::abs(r.sup_phi), std::abs(r.inf_phi));
  std::vector<double> a(n), b(n), c(n);
  for (int i = 0; i < n; ++i) {
    const double w0 = fs_density(p.grid.s(i));
    a[i] = phi[i] * p.w[i];
    b[i] = phi[i] * w0;
    c[i] = phi[i] * (w0 - p.w[i]);
  }
  r.neg_mean_phi_evolved = -kTwoPi * integrate(a, h) / V;
  r.mean_phi_ref = kTwoPi * integrate(b, h) / V;
  r.I_energy = kTwoPi * integrate(c, h) / V;
  r.dirichlet = dirichlet_energy(phi, p.grid);
  return r;
}

ProductFunctionals product_report(const FlowState& a, const FlowState& b) {
  const FunctionalReport ra = report(a), rb = report(b);
  ProductFunctionals out;
  out.sum.sup_phi = ra.sup_phi + rb.sup_phi;
  out.sum.inf_phi = ra.inf_phi + rb.inf_phi;
  out.sum.osc_phi = ra.osc_phi + rb.osc_phi;
  out.sum.sup_abs_phi = std::max(std::abs(out.sum.sup_phi), std::abs(out.sum.inf_phi));
  out.sum.neg_mean_phi_evolved = ra.neg_mean_phi_evolved + rb.neg_mean_phi_evolved;
  out.sum.mean_phi_ref = ra.mean_phi_ref + rb.mean_phi_ref;
  out.sum.I_energy = ra.I_energy + rb.I_energy;
  out.sum.dirichlet = ra.dirichlet + rb.dirichlet;
  // Cross terms d phi_a ^ dbar phi_b vanish against either factor's Kahler form.
  out.mixed_dirichlet = ra.dirichlet + rb.dirichlet;
  return out;
}

bool two_window_bounded(std::span<const double> t, std::span<const double> q, const DriftRule& rule) {
  if (t.size() != q.size() || t.size() < 2)
    fail(ErrorCode::InsufficientSnapshots, "drift rule needs at least two samples");
  const double half = 0.5 * (t.front() + t.back());
  double early = -1.0, late = -1.0;
  for (size_t i = 0; i < t.size(); ++i) {
    const double v = std::abs(q[i]);
    if (!std::isfinite(v)) return false;
    if (t[i] <= half) early = std::max(early, v);
    if (t[i] >= half) late = std::max(late, v);
  }
  if (early < 0.0 || late < 0.0) fail(ErrorCode::InsufficientSnapshots, "one of the two windows is empty");
  return late <= (1.0 + rule.relative) * early + rule.absolute_floor;
}

MonitorSeries make_series(std::string name, std::vector<double> t, std::vector<double> value, const DriftRule& rule) {
  MonitorSeries s;
  s.name = std::move(name);
  s.bounded = two_window_bounded(t, value, rule);
  s.max = value.empty() ? 0.0 : *std::max_element(value.begin(), value.end());
  for (double v : value) s.max_abs = std::max(s.max_abs, std::abs(v));
  s.t = std::move(t);
  s.value = std::move(value);
  return s;
}

std::vector<MonitorSeries> inequality_monitor(std::span<const FlowState> run, double delta, const DriftRule& rule) {
  if (run.size() < 2) fail(ErrorCode::InsufficientSnapshots, "inequality monitor needs at least two snapshots");
  if (!(delta > 0.0 && delta < 1.0)) fail(ErrorCode::InvalidArgument, "delta must lie in (0, 1)");
  const double n = 1.0;
  std::vector<double> t, c_sup, c_delta, c_perelman;
  for (const auto& s : run) {
    const FunctionalReport r = report(s);
    const GeometryReport g = curvature(s.profile);
    t.push_back(s.t);
    c_sup.push_back(r.neg_mean_phi_evolved - n * r.sup_phi);
    c_delta.push_back(r.sup_phi - (1.0 - delta) / delta * r.neg_mean_phi_evolved);
    c_perelman.push_back(g.sup_abs_R + g.diam + g.sup_abs_u + g.sup_grad_u);
  }
  std::vector<MonitorSeries> out;
  out.push_back(make_series("supphi", t, c_sup, rule));
  out.push_back(make_series("deltainv", t, c_delta, rule));
  out.push_back(make_series("perelman", t, c_perelman, rule));
  return out;
}

std::vector<MonitorSeries> equivalence_quantities(std::span<const FlowState> run, const DriftRule& rule) {
  if (run.size() < 2) fail(ErrorCode::InsufficientSnapshots, "equivalence suite needs at least two snapshots");
  std::vector<double> t;
  std::vector<std::vector<double>> q(7);
  for (const auto& s : run) {
    const FunctionalReport r = report(s);
    t.push_back(s.t);
    q[0].push_back(r.sup_abs_phi);
    q[1].push_back(r.sup_phi);
    q[2].push_back(r.inf_phi);
    q[3].push_back(r.mean_phi_ref);
    q[4].push_back(r.neg_mean_phi_evolved);
    q[5].push_back(r.I_energy);
    q[6].push_back(r.osc_phi);
  }
  static const char* names[7] = {"sup_abs_phi", "sup_phi", "inf_phi", "mean_phi_ref", "neg_mean_phi_evolved",
                                 "I_energy", "osc_phi"};
  std::vector<MonitorSeries> out;
  for (int k = 0; k < 7; ++k) out.push_back(make_series(names[k], t, q[k], rule));
  return out;
}

double gradient_energy_gap(const FlowState& state, std::span<const double> X, const MetricProfile& reference) {
  require_potential(state);
  if (X.size() != state.phi.size() || !(reference.grid == state.profile.grid))
    fail(ErrorCode::InvalidArgument, "comparison function or reference on a different grid");
  const auto phi_ref = reconstruct_potential(reference);
  std::vector<double> psi(state.phi.size());
  for (size_t i = 0; i < psi.size(); ++i) psi[i] = state.phi[i] - phi_ref[i];
  return std::abs(dirichlet_energy(psi, state.profile.grid) - dirichlet_energy(X, state.profile.grid));
}

}  // namespace krf
