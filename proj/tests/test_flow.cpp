#include <doctest.h>

#include <cmath>

#include "krf/errors.hpp"
#include "krf/flow.hpp"

using namespace krf;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

FlowConfig config(const Grid& g, double T, double dt = 0.01, double every = 0.25) {
  FlowConfig c;
  c.grid = g;
  c.T = T;
  c.dt = dt;
  c.snapshot_every = every;
  return c;
}

}  // namespace

TEST_CASE("FS is a fixed point of the density step") {
  const Grid g(20.0, 1024);
  const FlowState s0 = density_state(fs_background(g));
  for (Scheme sch : {Scheme::SDIRK3, Scheme::SDIRK2}) {
    const FlowState s1 = step_density(s0, 0.1, sch);
    CHECK(s1.profile.w == s0.profile.w);
    CHECK(s1.t == doctest::Approx(0.1));
  }
  const double bound = stability_bound(s0.profile, 0.5);
  const FlowState s2 = step_density(s0, 0.5 * bound, Scheme::RK4);
  double m = 0.0;
  for (int i = 0; i < g.N; ++i) m = std::max(m, std::abs(s2.profile.w[i] - s0.profile.w[i]));
  CHECK(m <= 1e-12);
}

TEST_CASE("explicit steps above the parabolic bound are refused") {
  const Grid g(20.0, 256);
  const FlowState s = density_state(perturbed_profile(g, "sech2", 0.3));
  const double bound = stability_bound(s.profile, 0.5);
  CHECK(code_of([&] { step_density(s, 10.0 * bound, Scheme::RK4); }) == ErrorCode::StabilityViolation);
  CHECK(code_of([&] { step_density(s, 10.0 * bound, Scheme::Euler); }) == ErrorCode::StabilityViolation);
  CHECK_NOTHROW(step_density(s, 0.9 * bound, Scheme::RK4));
}

TEST_CASE("an overshooting explicit step reports positivity loss") {
  const Grid g(20.0, 256);
  const FlowState s = density_state(perturbed_profile(g, "sech2", 0.3));
  CHECK(code_of([&] { step_density(s, 1.0, Scheme::Euler, 1e12); }) == ErrorCode::PositivityLoss);
}

TEST_CASE("standard perturbed run converges exponentially and conserves volume") {
  const Grid g(20.0, 1024);
  const FlowRun run = run_density(perturbed_profile(g, "sech2", 0.3), config(g, 20.0));
  std::vector<double> t, dev;
  for (const auto& s : run.snapshots) {
    CHECK(std::abs(s.profile.volume() - 4.0 * kPi) <= 1e-8);
    CHECK(s.profile.min_density() > 0.0);
    t.push_back(s.t);
    dev.push_back(max_deviation_from_fs(s.profile));
  }
  CHECK(run.termination == "horizon");
  CHECK(t.back() == doctest::Approx(20.0));
  CHECK(dev.back() <= 1e-4);
  CHECK(fitted_decay_rate(t, dev, 5.0) <= -0.5);
  // Decreasing on t >= 5 until it reaches roundoff.
  for (size_t i = 1; i < t.size(); ++i)
    if (t[i] >= 5.0 && dev[i] > 1e-12) CHECK(dev[i] < dev[i - 1]);
}

TEST_CASE("potential form: trivial and constant modes") {
  const Grid g(20.0, 512);
  {
    const FlowRun run = run_potential(std::vector<double>(g.N, 0.0), [&] {
      auto c = config(g, 2.0);
      c.gauge = Gauge::Raw;
      return c;
    }());
    for (const auto& s : run.snapshots)
      for (int i = 0; i < g.N; i += 31) {
        CHECK(s.phi[i] == 0.0);
        CHECK(s.phidot[i] == 0.0);
      }
  }
  {
    const double c0 = 0.7;
    auto cfg = config(g, 3.0, 0.001, 0.5);
    cfg.gauge = Gauge::Raw;
    const FlowRun run = run_potential(std::vector<double>(g.N, c0), cfg);
    for (const auto& s : run.snapshots) {
      const double expect = c0 * std::exp(s.t);
      for (int i = 0; i < g.N; i += 31) CHECK(std::abs(s.phi[i] - expect) <= 1e-6 * expect);
    }
  }
}

TEST_CASE("potential form needs a gauge") {
  const Grid g(20.0, 128);
  CHECK(code_of([&] { potential_state(g, std::vector<double>(g.N, 0.0), Gauge::DensityOnly); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("shooting gauge keeps the velocity bounded and density agrees with the density form") {
  const Grid g(20.0, 512);
  const MetricProfile init = perturbed_profile(g, "sech2", 0.3);
  auto cfg = config(g, 10.0, 0.01, 0.5);
  cfg.gauge = Gauge::Shoot;
  std::vector<double> phi0 = reconstruct_potential(init);
  const FlowRun pot = run_potential(phi0, cfg);
  const FlowRun den = run_density(init, config(g, 10.0, 0.01, 0.5));
  REQUIRE(pot.snapshots.size() == den.snapshots.size());
  double sup_vel = 0.0, first_vel = 0.0;
  for (size_t k = 0; k < pot.snapshots.size(); ++k) {
    const auto& s = pot.snapshots[k];
    double v = 0.0;
    for (double x : s.phidot) v = std::max(v, std::abs(x));
    if (k == 0) first_vel = v;
    sup_vel = std::max(sup_vel, v);
    double d = 0.0;
    for (int i = 0; i < g.N; ++i) d = std::max(d, std::abs(s.profile.w[i] - den.snapshots[k].profile.w[i]));
    CHECK(d <= 1e-5);
  }
  CHECK(sup_vel <= 2.0 * first_vel + 1e-6);
  CHECK(std::abs(mean_velocity(pot.snapshots.back())) <= 1e-6);
}

TEST_CASE("scalar evolution residual") {
  SUBCASE("FS stationary") {
    const Grid g(20.0, 1024);
    const FlowRun run = run_density(fs_background(g), config(g, 0.5, 0.01, 0.25));
    for (double r : scalar_evolution_residual(run.snapshots)) CHECK(r <= 1e-8);
  }
  SUBCASE("single snapshot") {
    const Grid g(20.0, 256);
    const std::vector<FlowState> one{density_state(fs_background(g))};
    CHECK(code_of([&] { scalar_evolution_residual(one); }) == ErrorCode::InsufficientSnapshots);
  }
  SUBCASE("second-order under refinement") {
    double res[2];
    int k = 0;
    for (int N : {1024, 2047}) {
      const Grid g(20.0, N);
      const FlowRun r = run_density(perturbed_profile(g, "sech2", 0.3), config(g, 0.5, 1e-3, 0.5));
      const FlowState s0 = r.snapshots.back();
      const std::vector<FlowState> pair{s0, step_density(s0, 1e-4)};
      res[k++] = scalar_evolution_residual(pair)[0];
    }
    CHECK(res[0] / res[1] >= 3.5);
    CHECK(res[0] / res[1] <= 4.5);
  }
}

TEST_CASE("attached potential reproduces the density and has zero mean velocity") {
  const Grid g(20.0, 1024);
  FlowState s = density_state(perturbed_profile(g, "sech", 0.2));
  attach_potential(s);
  const MetricProfile back = density_from_potential(g, s.phi);
  for (int i = 0; i < g.N; i += 17) CHECK(back.w[i] == doctest::Approx(s.profile.w[i]).epsilon(1e-9));
  CHECK(std::abs(mean_velocity(s)) <= 1e-12);
}

TEST_CASE("scheme and gauge names round trip") {
  for (Scheme s : {Scheme::SDIRK3, Scheme::SDIRK2, Scheme::RK4, Scheme::Euler}) CHECK(parse_scheme(to_string(s)) == s);
  for (Gauge x : {Gauge::Raw, Gauge::Shoot, Gauge::DensityOnly}) CHECK(parse_gauge(to_string(x)) == x);
  CHECK_THROWS_AS(parse_scheme("leapfrog"), Error);
}
