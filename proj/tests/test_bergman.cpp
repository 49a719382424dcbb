#include <doctest.h>

#include <cmath>
#include <random>

#include "krf/bergman.hpp"
#include "krf/errors.hpp"
#include "krf/flow.hpp"

using namespace krf;

namespace {

// d_k on FS from the Beta integral 2*pi*2^{nu+1} B(k+1, 2nu-k+1).
double fs_weight(int nu, int k) {
  return kTwoPi * std::exp((nu + 1) * std::log(2.0) + std::lgamma(k + 1.0) + std::lgamma(2.0 * nu - k + 1.0) -
                           std::lgamma(2.0 * nu + 2.0));
}

}  // namespace

TEST_CASE("FS Gram weights match the Beta integral") {
  const MetricProfile fs = fs_background(Grid(40.0, 4097));
  CHECK(fs_weight(1, 0) == doctest::Approx(8.0 * kPi / 3.0));
  CHECK(fs_weight(1, 1) == doctest::Approx(4.0 * kPi / 3.0));
  for (int nu = 1; nu <= 4; ++nu) {
    const SectionSystem sys = gram(fs, nu);
    REQUIRE(sys.size() == 2 * nu + 1);
    for (int k = 0; k < sys.size(); ++k) CHECK(std::abs(sys.d[k] / fs_weight(nu, k) - 1.0) <= 1e-8);
  }
}

TEST_CASE("FS density is the constant (1/nu) log((2nu+1)/(4 pi)) and traces to 2nu+1") {
  const MetricProfile fs = fs_background(Grid(40.0, 4097));
  for (int nu = 1; nu <= 4; ++nu) {
    const BergmanDensity F = bergman_density(gram(fs, nu));
    const double expect = std::log((2.0 * nu + 1.0) / (4.0 * kPi)) / nu;
    CHECK(std::abs(F.inf - expect) <= 1e-6);
    CHECK(std::abs(F.sup - expect) <= 1e-6);
    CHECK(std::abs(trace_integral(F, fs) - (2.0 * nu + 1.0)) <= 1e-6);
  }
}

TEST_CASE("trace identity holds on perturbed profiles") {
  for (const char* fam : {"sech2", "sech"}) {
    const MetricProfile p = perturbed_profile(Grid(40.0, 4097), fam, 0.3);
    for (int nu = 1; nu <= 4; ++nu) {
      const BergmanDensity F = bergman_density(gram(p, nu));
      CHECK(std::abs(trace_integral(F, p) - (2.0 * nu + 1.0)) <= 1e-6);
    }
  }
}

TEST_CASE("off-diagonal inner products vanish") {
  const MetricProfile p = perturbed_profile(Grid(20.0, 1024), "sech2", 0.3);
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l)
      if (k != l) CHECK(std::abs(off_diagonal_inner(p, 1, k, l)) <= 1e-12);
}

TEST_CASE("density does not depend on the chosen basis") {
  const MetricProfile p = perturbed_profile(Grid(20.0, 1024), "sech", 0.2);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int nu = 1; nu <= 3; ++nu) {
    const int m = 2 * nu + 1;
    std::vector<double> B(m * m);
    for (int a = 0; a < m; ++a)
      for (int k = 0; k < m; ++k) B[a * m + k] = (a == k ? 3.0 : 0.0) + U(rng);
    const BergmanDensity F0 = bergman_density(gram(p, nu));
    const BergmanDensity F1 = bergman_density_general(p, nu, B);
    for (int i = 0; i < p.grid.N; i += 13) CHECK(std::abs(F0.F[i] - F1.F[i]) <= 1e-10);
  }
}

TEST_CASE("symmetric profiles have symmetric densities") {
  const MetricProfile p = perturbed_profile(Grid(20.0, 1025), "sech2", 0.3);
  const BergmanDensity F = bergman_density(gram(p, 2));
  const int N = p.grid.N;
  for (int i = 0; i < N; ++i) CHECK(std::abs(F.F[i] - F.F[N - 1 - i]) <= 1e-12);
}

TEST_CASE("sup |S_1|^2 on FS is 3/(8 pi)") {
  const MetricProfile fs = fs_background(Grid(20.0, 1025));
  const SectionNorms n = section_sup_norms(gram(fs, 1));
  CHECK(std::abs(n.sup_S[1] * n.sup_S[1] - 3.0 / (8.0 * kPi)) <= 1e-8);
}

TEST_CASE("section Laplace identity converges at second order") {
  double res[2];
  int k = 0;
  for (int N : {4095, 8189}) {
    const MetricProfile p = fs_background(Grid(20.0, N));
    res[k++] = laplace_identity_residual(gram(p, 1), curvature(p));
  }
  CHECK(res[1] <= 1e-6);
  CHECK(res[0] / res[1] >= 3.5);
  CHECK(res[0] / res[1] <= 4.5);
  double hes[2];
  k = 0;
  for (int N : {2049, 4097}) {
    const MetricProfile p = perturbed_profile(Grid(20.0, N), "sech2", 0.3);
    hes[k++] = hessian_identity_residual(gram(p, 2), curvature(p));
  }
  CHECK(hes[0] / hes[1] >= 3.5);
  CHECK(hes[0] / hes[1] <= 4.5);
}

TEST_CASE("product density is the sum of the factor densities") {
  const Grid g(16.0, 129);
  const MetricProfile a = fs_background(g);
  const MetricProfile b = perturbed_profile(g, "sech2", 0.3);
  for (int nu = 1; nu <= 2; ++nu) {
    const std::vector<double> F = product_bergman_density(a, b, nu);
    const BergmanDensity Fa = bergman_density(gram(a, nu));
    const BergmanDensity Fb = bergman_density(gram(b, nu));
    for (int i = 0; i < g.N; i += 7)
      for (int j = 0; j < g.N; j += 11) CHECK(std::abs(F[i * g.N + j] - Fa.F[i] - Fb.F[j]) <= 1e-9);
  }
}

TEST_CASE("transition and comparison function") {
  const Grid g(20.0, 1024);
  FlowState s = density_state(fs_background(g));
  attach_potential(s);
  const SectionSystem ref = gram(s.profile, 2);

  SUBCASE("identity transition has no defect") {
    const TransitionSpectrum spec = transition(ref, ref);
    for (double l : spec.lambda) CHECK(l == doctest::Approx(1.0));
    CHECK(partial_c0_defect(s, spec, ref) <= 1e-10);
  }
  SUBCASE("mismatched systems are rejected") {
    bool raised = false;
    try {
      transition(ref, gram(s.profile, 1));
    } catch (const Error& e) {
      raised = e.code() == ErrorCode::MismatchedSystems;
    }
    CHECK(raised);
    raised = false;
    try {
      transition(ref, gram(fs_background(Grid(20.0, 512)), 2));
    } catch (const Error& e) {
      raised = e.code() == ErrorCode::MismatchedSystems;
    }
    CHECK(raised);
  }
  SUBCASE("defect stays small along a converging run") {
    FlowConfig cfg;
    cfg.grid = g;
    cfg.T = 4.0;
    cfg.snapshot_every = 1.0;
    FlowRun run = run_density(perturbed_profile(g, "sech2", 0.3), cfg);
    for (auto& x : run.snapshots) attach_potential(x);
    const SectionSystem r0 = gram(run.snapshots.front().profile, 2);
    for (const auto& x : run.snapshots) {
      const TransitionSpectrum spec = transition(r0, gram(x.profile, 2));
      const double D = partial_c0_defect(x, spec, r0);
      CHECK(std::isfinite(D));
      CHECK(D <= 1.0);
    }
  }
}
