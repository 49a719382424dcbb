#include <doctest.h>

#include <cmath>
#include <random>

#include "krf/bergman.hpp"
#include "krf/errors.hpp"
#include "krf/functionals.hpp"

using namespace krf;

namespace {

FlowState with_potential(const Grid& g, std::vector<double> phi) {
  FlowState s;
  s.profile = density_from_potential(g, phi);
  s.phi = std::move(phi);
  s.phidot.assign(g.N, 0.0);
  return s;
}

std::vector<double> bump(const Grid& g, double a, double width) {
  std::vector<double> phi(g.N);
  for (int i = 0; i < g.N; ++i) phi[i] = a / std::cosh(g.s(i) / width);
  return phi;
}

}  // namespace

TEST_CASE("zero and constant potentials") {
  const Grid g(20.0, 1024);
  const FunctionalReport z = report(with_potential(g, std::vector<double>(g.N, 0.0)));
  CHECK(z.sup_phi == 0.0);
  CHECK(z.osc_phi == 0.0);
  CHECK(z.I_energy == 0.0);
  CHECK(z.dirichlet == 0.0);
  for (double c : {-2.0, 0.5, 3.0}) {
    const FunctionalReport r = report(with_potential(g, std::vector<double>(g.N, c)));
    CHECK(r.sup_phi == doctest::Approx(c));
    CHECK(r.inf_phi == doctest::Approx(c));
    CHECK(r.sup_abs_phi == doctest::Approx(std::abs(c)));
    CHECK(std::abs(r.osc_phi) <= 1e-14);
    CHECK(r.neg_mean_phi_evolved == doctest::Approx(-c).epsilon(1e-9));
    CHECK(r.mean_phi_ref == doctest::Approx(c).epsilon(1e-9));
    CHECK(std::abs(r.I_energy) <= 1e-9);
    CHECK(std::abs(r.dirichlet) <= 1e-14);
  }
}

TEST_CASE("I energy equals the Dirichlet energy and is quadratic") {
  const Grid g(20.0, 1024);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> A(-0.8, 0.8), W(0.7, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto phi = bump(g, A(rng), W(rng));
    const FunctionalReport r = report(with_potential(g, phi));
    CHECK(r.dirichlet >= 0.0);
    CHECK(std::abs(r.I_energy - r.dirichlet) <= 1e-10 * std::max(1.0, r.dirichlet));
    std::vector<double> twice(phi);
    for (double& x : twice) x *= 2.0;
    CHECK(dirichlet_energy(twice, g) == doctest::Approx(4.0 * dirichlet_energy(phi, g)).epsilon(1e-12));
    // The comparisons sup - mean and mean - inf are nonnegative.
    CHECK(r.sup_phi + r.neg_mean_phi_evolved >= -1e-12);
    CHECK(r.mean_phi_ref - r.inf_phi >= -1e-12);
  }
}

TEST_CASE("report requires a potential") {
  FlowState s = density_state(fs_background(Grid(20.0, 128)));
  s.phi.clear();
  bool raised = false;
  try {
    report(s);
  } catch (const Error& e) {
    raised = e.code() == ErrorCode::MissingPotential;
  }
  CHECK(raised);
}

TEST_CASE("product functionals add") {
  const Grid g(20.0, 512);
  const FlowState a = with_potential(g, bump(g, 0.3, 1.0));
  const FlowState b = with_potential(g, bump(g, -0.2, 2.0));
  const ProductFunctionals p = product_report(a, b);
  const FunctionalReport ra = report(a), rb = report(b);
  CHECK(p.sum.sup_phi == doctest::Approx(ra.sup_phi + rb.sup_phi));
  CHECK(p.sum.inf_phi == doctest::Approx(ra.inf_phi + rb.inf_phi));
  CHECK(p.sum.I_energy == doctest::Approx(ra.I_energy + rb.I_energy));
  CHECK(p.mixed_dirichlet == doctest::Approx(ra.dirichlet + rb.dirichlet));
}

TEST_CASE("two-window drift rule") {
  std::vector<double> t(41);
  for (int i = 0; i <= 40; ++i) t[i] = 0.25 * i;
  std::vector<double> flat(41, 2.0), decay(41), grow(41), tiny(41);
  for (int i = 0; i <= 40; ++i) {
    decay[i] = std::exp(-t[i]);
    grow[i] = std::exp(t[i]);
    tiny[i] = 1e-12 * (1.0 + t[i]);
  }
  CHECK(two_window_bounded(t, flat));
  CHECK(two_window_bounded(t, decay));
  CHECK_FALSE(two_window_bounded(t, grow));
  CHECK(two_window_bounded(t, tiny));
  std::vector<double> neg(flat);
  for (double& x : neg) x = -x;
  CHECK(two_window_bounded(t, neg));
  // Exactly at the tolerance.
  std::vector<double> edge(41, 1.0);
  for (int i = 21; i <= 40; ++i) edge[i] = 1.1;
  CHECK(two_window_bounded(t, edge));
  edge.back() = 1.1 + 1e-6;
  CHECK_FALSE(two_window_bounded(t, edge));

  const std::vector<double> one{0.0}, v{1.0};
  CHECK_THROWS_AS(two_window_bounded(one, v), Error);
}

TEST_CASE("monitors on FS") {
  const Grid g(20.0, 1025);
  FlowState a = density_state(fs_background(g));
  attach_potential(a);
  FlowState b = a;
  b.t = 1.0;
  const std::vector<FlowState> run{a, b};
  for (const auto& m : inequality_monitor(run)) {
    CHECK(m.bounded);
    if (m.name == "perelman") CHECK(m.max == doctest::Approx(1.0 + kPi).epsilon(1e-6));
    if (m.name == "supphi") CHECK(std::abs(m.max) <= 1e-9);
  }
  const auto eq = equivalence_quantities(run);
  CHECK(eq.size() == 7);
  for (const auto& m : eq) CHECK(m.bounded);

  const std::vector<FlowState> single{a};
  CHECK_THROWS_AS(inequality_monitor(single), Error);
  CHECK_THROWS_AS(inequality_monitor(run, 1.5), Error);

  const SectionSystem ref = gram(a.profile, 1);
  const auto X = comparison_function(transition(ref, ref), ref);
  CHECK(gradient_energy_gap(a, X, a.profile) <= 1e-10);
}
