// Acceptance checks 1-10. Prints one PASS/FAIL line per criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "krf/bergman.hpp"
#include "krf/criteria.hpp"
#include "krf/errors.hpp"
#include "krf/experiment.hpp"
#include "krf/flow.hpp"
#include "krf/lct.hpp"
#include "support/germs.hpp"

using namespace krf;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Pinned tolerances and budgets.
constexpr double kTable2Seconds = 5.0;
constexpr int kCrossGerms = 100;
constexpr std::uint64_t kCrossSeed = 20261015;
constexpr double kOracleWidth = 0.05;
constexpr double kCrossSeconds = 300.0;
constexpr int kHolderPairs = 100;
constexpr std::uint64_t kHolderSeed = 4242;
constexpr double kHolderSeconds = 60.0;
constexpr double kCriteriaSeconds = 1.0;
constexpr double kFixedPointTol = 1e-6;
constexpr double kFixedPointSeconds = 60.0;
constexpr double kConvergedTol = 1e-4;
constexpr double kSlopeMax = -0.5;
constexpr double kConvergenceSeconds = 300.0;
constexpr double kGramTol = 1e-8;
constexpr double kDensityTol = 1e-6;
constexpr double kTraceTol = 1e-6;
constexpr double kRatioLo = 3.5;
constexpr double kRatioHi = 4.5;
constexpr double kSectionSlack = 3.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome table2() {
  const auto t0 = std::chrono::steady_clock::now();
  const Table2Report rep = reproduce_table2();
  int ok = 0;
  for (const auto& l : rep.lines) ok += l.match && l.engines_agree && l.computed.exact;
  const double dt = seconds_since(t0);
  return {rep.all_match && ok == static_cast<int>(rep.lines.size()) && dt < kTable2Seconds,
          fmt("%d/%zu rows exact, %.2f s", ok, rep.lines.size(), dt)};
}

Outcome cross_validation() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(kCrossSeed);
  int exact_ok = 0, newton_checked = 0, bracket_ok = 0;
  double widest = 0.0;
  std::string first_bad;
  for (int i = 0; i < kCrossGerms; ++i) {
    const testing::RandomGerm g = testing::random_family_germ(rng);
    const Rational expect = g.base_lct / g.power;
    bool ok = true;
    try {
      const LctResult res = lct_resolution(g.germ);
      const LctResult n = lct_newton(g.germ);
      if (!n.degenerate) {
        ++newton_checked;
        ok = ok && n.value == res.value;
      }
      ok = ok && res.value == expect;
      exact_ok += ok;
      const auto [lo, hi] = lct_numeric_oracle(g.germ);
      widest = std::max(widest, hi - lo);
      const double v = expect.get_d();
      const bool b = lo <= v && v <= hi && hi - lo <= kOracleWidth;
      bracket_ok += b;
      ok = ok && b;
    } catch (const Error& e) {
      ok = false;
      if (first_bad.empty()) first_bad = g.label + ": " + e.what();
    }
    if (!ok && first_bad.empty()) first_bad = g.label;
  }
  const double dt = seconds_since(t0);
  Outcome o;
  o.pass = exact_ok == kCrossGerms && bracket_ok == kCrossGerms && dt < kCrossSeconds;
  o.detail = fmt("%d/%d exact engines agree (%d via Newton), %d/%d oracle brackets contain the value, widest %.3f, %.1f s",
                 exact_ok, kCrossGerms, newton_checked, bracket_ok, kCrossGerms, widest, dt);
  if (!first_bad.empty()) o.detail += "; first failure " + first_bad;
  return o;
}

Outcome holder_and_power() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(kHolderSeed);
  int holder_ok = 0;
  for (int i = 0; i < kHolderPairs; ++i) {
    const testing::RandomGerm f = testing::random_family_germ(rng);
    const testing::RandomGerm g = testing::random_family_germ(rng);
    CurveGerm fg;
    fg.poly = f.germ.poly * g.germ.poly;
    const LctResult r = lct_auto(fg);
    const Rational lf = f.base_lct / f.power, lg = g.base_lct / g.power;
    holder_ok += r.exact && 1 / r.value <= 1 / lf + 1 / lg;
  }
  int power_ok = 0, power_total = 0;
  for (const auto& fam : testing::table_families()) {
    const CurveGerm g = parse_germ(fam.text);
    for (int m = 1; m <= 4; ++m) {
      CurveGerm gm = g;
      gm.poly = g.poly.pow(m);
      ++power_total;
      power_ok += lct_resolution(gm).value * m == fam.lct && lct_power(g, m).value * m == fam.lct;
    }
  }
  const double dt = seconds_since(t0);
  return {holder_ok == kHolderPairs && power_ok == power_total && dt < kHolderSeconds,
          fmt("Holder %d/%d pairs, power rule %d/%d, %.1f s", holder_ok, kHolderPairs, power_ok, power_total, dt)};
}

Outcome criteria_logic() {
  const auto t0 = std::chrono::steady_clock::now();
  const CriterionVerdict a = check_nuconv(2, parse_alpha("5/6"));
  const CriterionVerdict b = check_nuconvr(2, parse_alpha("2/3"), parse_alpha("2/3:strict"));
  const CriterionVerdict c = check_nuconvr(2, parse_alpha("2/3"), parse_alpha("2/3"));
  const double dt = seconds_since(t0);
  return {a.pass && a.threshold == Rational(2, 3) && b.pass && !c.pass && dt < kCriteriaSeconds,
          fmt("nuconv(5/6) %s, nuconvr(2/3, >2/3) %s, nuconvr(2/3, 2/3) %s, threshold %s, %.3f s",
              a.pass ? "pass" : "fail", b.pass ? "pass" : "fail", c.pass ? "pass" : "fail",
              c.threshold.get_str().c_str(), dt)};
}

Outcome fs_fixed_point() {
  const auto t0 = std::chrono::steady_clock::now();
  const Grid g(20.0, 1024);
  FlowConfig cfg;
  cfg.grid = g;
  cfg.T = 5.0;
  const FlowRun run = run_density(density_from_potential(g, std::vector<double>(g.N, 0.0)), cfg);
  double worst = 0.0;
  for (const auto& s : run.snapshots) worst = std::max(worst, max_deviation_from_fs(s.profile));
  const double dt = seconds_since(t0);
  return {worst <= kFixedPointTol && run.snapshots.back().t >= 5.0 - 1e-12 && dt < kFixedPointSeconds,
          fmt("max|w - w0| = %.3g up to T = %.2f, %.2f s", worst, run.snapshots.back().t, dt)};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("krf_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

struct StandardRun {
  json summary;
  double seconds = 0.0;
};

const StandardRun& standard_run() {
  static const StandardRun r = [] {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    cfg.grid = Grid(20.0, 1024);
    cfg.family = "sech2";
    cfg.amplitude = 0.3;
    cfg.T = 20.0;
    cfg.output = scratch("standard").string();
    run_experiment(cfg);
    StandardRun s;
    s.summary = read_json(fs::path(cfg.output) / "summary.json");
    s.seconds = seconds_since(t0);
    fs::remove_all(cfg.output);
    return s;
  }();
  return r;
}

Outcome convergence() {
  const StandardRun& r = standard_run();
  const double dev = r.summary["final_max_deviation"];
  const double slope = r.summary["decay_rate"];
  return {dev <= kConvergedTol && slope <= kSlopeMax && r.seconds < kConvergenceSeconds,
          fmt("max|w - w0|(20) = %.3g, fitted slope on [5, 20] = %.3f, %.1f s", dev, slope, r.seconds)};
}

Outcome bergman_closed_forms() {
  const MetricProfile fs_p = fs_background(Grid(20.0, 1024));
  const SectionSystem s1 = gram(fs_p, 1);
  const double expect_d[3] = {8.0 * kPi / 3.0, 4.0 * kPi / 3.0, 8.0 * kPi / 3.0};
  double dk = 0.0;
  for (int k = 0; k < 3; ++k) dk = std::max(dk, std::abs(s1.d[k] - expect_d[k]));
  const BergmanDensity F1 = bergman_density(s1);
  const double f1 = std::log(3.0 / (4.0 * kPi));
  double df = 0.0;
  for (double x : F1.F) df = std::max(df, std::abs(x - f1));
  double dtr = 0.0;
  for (int nu = 1; nu <= 4; ++nu)
    dtr = std::max(dtr, std::abs(trace_integral(bergman_density(gram(fs_p, nu)), fs_p) - (2.0 * nu + 1.0)));
  return {dk <= kGramTol && df <= kDensityTol && dtr <= kTraceTol,
          fmt("Gram weight error %.2g, F_1 error %.2g, trace error (nu <= 4) %.2g", dk, df, dtr)};
}

Outcome residual_orders() {
  double lap[2];
  int k = 0;
  for (int N : {4095, 8189}) {
    const MetricProfile p = fs_background(Grid(20.0, N));
    lap[k++] = laplace_identity_residual(gram(p, 1), curvature(p));
  }
  double sc[2];
  k = 0;
  for (int N : {1024, 2047}) {
    const Grid g(20.0, N);
    FlowConfig cfg;
    cfg.grid = g;
    cfg.T = 0.5;
    cfg.dt = 1e-3;
    cfg.snapshot_every = 0.5;
    const FlowRun r = run_density(perturbed_profile(g, "sech2", 0.3), cfg);
    const FlowState s0 = r.snapshots.back();
    const std::vector<FlowState> pair{s0, step_density(s0, 1e-4)};
    sc[k++] = scalar_evolution_residual(pair)[0];
  }
  const double rl = lap[0] / lap[1], rs = sc[0] / sc[1];
  return {rl >= kRatioLo && rl <= kRatioHi && rs >= kRatioLo && rs <= kRatioHi,
          fmt("section Laplace residual %.3g -> %.3g (ratio %.2f), scalar evolution residual %.3g -> %.3g (ratio %.2f)",
              lap[0], lap[1], rl, sc[0], sc[1], rs)};
}

Outcome monitors() {
  const json& s = standard_run().summary;
  bool inf_ok = true;
  bool defect_ok = true;
  std::string nus;
  for (const auto& pn : s["tamed"]["per_nu"]) {
    inf_ok = inf_ok && pn["inf_F"]["bounded"].get<bool>();
    defect_ok = defect_ok && pn["defect"]["bounded"].get<bool>();
    nus += std::to_string(pn["nu"].get<int>());
  }
  const bool gap_ok = s["gradient_energy_gap"]["bounded"];
  const bool per_ok = s["inequality_constants"]["perelman"]["bounded"];
  const bool a = inf_ok && defect_ok && gap_ok && per_ok && nus == "123";

  // Raw-gauge constant mode: phi0 = 1 on FS grows like e^t.
  ExperimentConfig cfg;
  cfg.grid = Grid(20.0, 1024);
  cfg.family = "fs";
  cfg.amplitude = 0.0;
  cfg.form = FlowForm::Potential;
  cfg.gauge = Gauge::Raw;
  cfg.potential_offset = 1.0;
  cfg.T = 5.0;
  cfg.monitors = {"functionals", "equivalence"};
  cfg.output = scratch("raw").string();
  run_experiment(cfg);
  const json raw = read_json(fs::path(cfg.output) / "summary.json");
  fs::remove_all(cfg.output);
  int unbounded = 0, total = 0;
  std::string flagged, unflagged;
  for (const auto& [name, q] : raw["equivalence"].items()) {
    ++total;
    if (!q["bounded"].get<bool>()) {
      ++unbounded;
      flagged += (flagged.empty() ? "" : " ") + name;
    } else {
      unflagged += (unflagged.empty() ? "" : " ") + name;
    }
  }
  const bool b = total == 7 && unbounded == total;
  return {a && b, fmt("converging run: inf F (nu 1,2,3) %s, defect %s, gradient-energy gap %s, Perelman sum %s; "
                      "raw constant mode: %d/%d flagged unbounded [%s], bounded [%s]",
                      inf_ok ? "bounded" : "DRIFT", defect_ok ? "bounded" : "DRIFT", gap_ok ? "bounded" : "DRIFT",
                      per_ok ? "bounded" : "DRIFT", unbounded, total, flagged.c_str(), unflagged.c_str())};
}

Outcome section_scaling() {
  const Grid g(20.0, 1025);
  bool ok = true;
  std::string detail;
  for (const char* fam : {"fs", "sech2"}) {
    const MetricProfile p = std::string(fam) == "fs" ? fs_background(g) : perturbed_profile(g, fam, 0.3);
    const double A0 = section_sup_norms(gram(p, 1)).max_S;
    double worst = 0.0;
    for (int nu = 1; nu <= 8; ++nu)
      worst = std::max(worst, section_sup_norms(gram(p, nu)).max_S / (A0 * std::sqrt(static_cast<double>(nu))));
    ok = ok && worst <= kSectionSlack;
    detail += fmt("%s%s: A0 = %.4f, max ratio %.3f", detail.empty() ? "" : "; ", fam, A0, worst);
  }
  return {ok, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"Table 2 reproduction", table2},
      {"engine cross-validation", cross_validation},
      {"Holder and power properties", holder_and_power},
      {"criteria logic", criteria_logic},
      {"FS fixed point", fs_fixed_point},
      {"exponential convergence", convergence},
      {"Bergman closed forms", bergman_closed_forms},
      {"identity residual orders", residual_orders},
      {"monitors bounded", monitors},
      {"section-norm scaling", section_scaling},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %zu (%s): %s  %s\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
